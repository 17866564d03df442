#ifndef MASKEM_GF2_HPP
#define MASKEM_GF2_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include "maskem/errors.hpp"
#include "maskem/rng.hpp"

namespace maskem::gf2 {

using word = std::uint64_t;
inline constexpr std::size_t kWordBits = 64;

// Dense GF(2) matrix. Row-major, packed into 64-bit words, LSB-first: bit j of
// a row lives in word j/64 at bit position j%64. Pad bits above cols are kept
// zero by every operation, so whole-word comparisons and reductions are valid.
class BitMatrix {
public:
    // Zero matrix. rows >= 1 and cols >= 1.
    BitMatrix(std::size_t rows, std::size_t cols);

    static BitMatrix identity(std::size_t n);
    static BitMatrix random(std::size_t rows, std::size_t cols, Rng& rng);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t words_per_row() const { return wpr_; }

    bool get(std::size_t r, std::size_t c) const {
        return (data_[r * wpr_ + c / kWordBits] >> (c % kWordBits)) & 1u;
    }
    void set(std::size_t r, std::size_t c, bool v) {
        word& w = data_[r * wpr_ + c / kWordBits];
        const word bit = word{1} << (c % kWordBits);
        w = v ? (w | bit) : (w & ~bit);
    }
    void flip(std::size_t r, std::size_t c) {
        data_[r * wpr_ + c / kWordBits] ^= word{1} << (c % kWordBits);
    }

    word* row_data(std::size_t r) { return data_.data() + r * wpr_; }
    const word* row_data(std::size_t r) const { return data_.data() + r * wpr_; }

    void swap_rows(std::size_t i, std::size_t j);
    // row dst ^= row src (of other; may be *this).
    void xor_row(std::size_t dst, const BitMatrix& other, std::size_t src);

    bool operator==(const BitMatrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
    }
    bool operator!=(const BitMatrix& o) const { return !(*this == o); }

    bool is_zero() const;

private:
    std::size_t rows_, cols_, wpr_;
    std::vector<word> data_;
};

// Bit vector with the same packing as a single matrix row.
class BitVector {
public:
    BitVector() : len_(0) {}
    explicit BitVector(std::size_t len);
    static BitVector random(std::size_t len, Rng& rng);

    std::size_t size() const { return len_; }
    bool get(std::size_t i) const {
        return (data_[i / kWordBits] >> (i % kWordBits)) & 1u;
    }
    void set(std::size_t i, bool v) {
        word& w = data_[i / kWordBits];
        const word bit = word{1} << (i % kWordBits);
        w = v ? (w | bit) : (w & ~bit);
    }
    void flip(std::size_t i) { data_[i / kWordBits] ^= word{1} << (i % kWordBits); }

    std::size_t weight() const;

    word* data() { return data_.data(); }
    const word* data() const { return data_.data(); }
    std::size_t word_count() const { return data_.size(); }

    bool operator==(const BitVector& o) const {
        return len_ == o.len_ && data_ == o.data_;
    }
    bool operator!=(const BitVector& o) const { return !(*this == o); }

private:
    std::size_t len_;
    std::vector<word> data_;
};

// c = a * b over GF(2). Dimension mismatch throws DimensionError.
BitMatrix mul(const BitMatrix& a, const BitMatrix& b);

// Entrywise XOR. Same dimensions required.
BitMatrix add(const BitMatrix& a, const BitMatrix& b);
BitVector add(const BitVector& a, const BitVector& b);

// Rank via Gaussian elimination on a working copy.
std::size_t rank(const BitMatrix& a);

// Inverse of a square matrix via Gauss-Jordan elimination; throws
// NotInvertibleError when rank < dimension.
BitMatrix invert(const BitMatrix& a);

// Rejection-samples uniform matrices until rank equals min(rows, cols).
BitMatrix random_full_rank(std::size_t rows, std::size_t cols, Rng& rng);

// New matrix with the listed columns removed. Indices must be sorted,
// distinct, in range, and must leave at least one column.
BitMatrix remove_columns(const BitMatrix& a, const std::vector<std::size_t>& cols);

// y = a * v. When macs is non-null, adds rows*cols to it: one
// multiply-accumulate per matrix entry, the cost model the complexity
// figures count.
BitVector mul_vec(const BitMatrix& a, const BitVector& v,
                  std::uint64_t* macs = nullptr);

// Serialization: "GF2M" | version u8=1 | rows u32-LE | cols u32-LE, then
// rows*ceil(cols/8) payload bytes, row-major, LSB-first within each byte,
// pad bits zero. A vector serializes as a 1 x len matrix.
void write_matrix(std::vector<std::uint8_t>& out, const BitMatrix& m);
BitMatrix read_matrix(const std::vector<std::uint8_t>& in, std::size_t& offset);
void write_vector(std::vector<std::uint8_t>& out, const BitVector& v);
BitVector read_vector(const std::vector<std::uint8_t>& in, std::size_t& offset);

}  // namespace maskem::gf2

#endif
