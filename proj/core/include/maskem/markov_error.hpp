#ifndef MASKEM_MARKOV_ERROR_HPP
#define MASKEM_MARKOV_ERROR_HPP

#include <cstddef>

#include "maskem/gf2.hpp"
#include "maskem/rng.hpp"

namespace maskem::markov {

// Three-state error source. State 00 emits 0 and stays with probability mu,
// or emits 1 and moves to state 01; states 01 and 10 each emit a forced 0 and
// advance (01 -> 10 -> 00). Every 1 is therefore followed by at least two 0s,
// so any two 1s are at least three positions apart.
struct ErrorModel {
    double mu;

    explicit ErrorModel(double mu_);  // requires 0 <= mu <= 1
};

// Length-n output of the chain started in state 00. Requires 0 < mu < 1.
gf2::BitVector sample_error(std::size_t n, const ErrorModel& model, Rng& rng);

struct Stationary {
    double pi1, pi2, pi3;  // states 00, 01, 10
};

// pi1 = 1/(3-2mu), pi2 = pi3 = (1-mu)/(3-2mu).
Stationary stationary(const ErrorModel& model);

// Binary entropy H(x) in bits; 0 at the endpoints.
double binary_entropy(double x);

// Entropy rate of the chain: H(mu)/(3-2mu) bits per emitted symbol.
double entropy_per_bit(const ErrorModel& model);

// Maximum achievable entropy rate over all mu: log2 of the largest real root
// of x^3 = x^2 + 1 (the adjacency spectral radius), about 0.5515.
double max_entropy();

// Probability of a 1 in the stationary output: (1-mu)/(3-2mu).
double prob_one(const ErrorModel& model);

// Stationary expected number of 1s in n symbols: n*(1-mu)/(3-2mu).
double expected_weight(std::size_t n, const ErrorModel& model);

// True iff consecutive 1s are at least three positions apart. A trailing 1
// whose forced zero-run is cut off by the end of the vector is legal.
bool is_valid_error(const gf2::BitVector& f);

}  // namespace maskem::markov

#endif
