#include "maskem/gf2.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <string>

namespace maskem::gf2 {

namespace {

std::size_t words_for(std::size_t bits) { return (bits + kWordBits - 1) / kWordBits; }

// Mask selecting the valid bits of the last word of a row of width cols.
word tail_mask(std::size_t cols) {
    const std::size_t rem = cols % kWordBits;
    return rem == 0 ? ~word{0} : (word{1} << rem) - 1;
}

}  // namespace

BitMatrix::BitMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), wpr_(words_for(cols)) {
    if (rows == 0 || cols == 0)
        throw InvariantError("BitMatrix requires rows >= 1 and cols >= 1");
    data_.assign(rows_ * wpr_, 0);
}

BitMatrix BitMatrix::identity(std::size_t n) {
    BitMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.set(i, i, true);
    return m;
}

BitMatrix BitMatrix::random(std::size_t rows, std::size_t cols, Rng& rng) {
    BitMatrix m(rows, cols);
    const word tm = tail_mask(cols);
    for (std::size_t r = 0; r < rows; ++r) {
        word* row = m.row_data(r);
        for (std::size_t w = 0; w < m.wpr_; ++w) row[w] = rng.next_u64();
        row[m.wpr_ - 1] &= tm;
    }
    return m;
}

void BitMatrix::swap_rows(std::size_t i, std::size_t j) {
    if (i == j) return;
    word* a = row_data(i);
    word* b = row_data(j);
    for (std::size_t w = 0; w < wpr_; ++w) std::swap(a[w], b[w]);
}

void BitMatrix::xor_row(std::size_t dst, const BitMatrix& other, std::size_t src) {
    word* d = row_data(dst);
    const word* s = other.row_data(src);
    for (std::size_t w = 0; w < wpr_; ++w) d[w] ^= s[w];
}

bool BitMatrix::is_zero() const {
    for (word w : data_)
        if (w) return false;
    return true;
}

BitVector::BitVector(std::size_t len) : len_(len) {
    if (len == 0) throw InvariantError("BitVector requires len >= 1");
    data_.assign(words_for(len), 0);
}

BitVector BitVector::random(std::size_t len, Rng& rng) {
    BitVector v(len);
    for (std::size_t w = 0; w < v.data_.size(); ++w) v.data_[w] = rng.next_u64();
    v.data_.back() &= tail_mask(len);
    return v;
}

std::size_t BitVector::weight() const {
    std::size_t c = 0;
    for (word w : data_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
}

BitMatrix mul(const BitMatrix& a, const BitMatrix& b) {
    if (a.cols() != b.rows())
        throw DimensionError("mul: " + std::to_string(a.rows()) + "x" +
                             std::to_string(a.cols()) + " * " +
                             std::to_string(b.rows()) + "x" +
                             std::to_string(b.cols()));
    BitMatrix c(a.rows(), b.cols());
    const std::size_t awpr = a.words_per_row();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const word* arow = a.row_data(i);
        // Accumulate rows of b selected by the set bits of row i of a.
        for (std::size_t wi = 0; wi < awpr; ++wi) {
            word w = arow[wi];
            while (w) {
                const std::size_t k = wi * kWordBits +
                                      static_cast<std::size_t>(std::countr_zero(w));
                c.xor_row(i, b, k);
                w &= w - 1;
            }
        }
    }
    return c;
}

BitMatrix add(const BitMatrix& a, const BitMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionError("add: shape mismatch");
    BitMatrix c = a;
    for (std::size_t r = 0; r < a.rows(); ++r) c.xor_row(r, b, r);
    return c;
}

BitVector add(const BitVector& a, const BitVector& b) {
    if (a.size() != b.size()) throw DimensionError("add: vector length mismatch");
    BitVector c = a;
    for (std::size_t w = 0; w < c.word_count(); ++w) c.data()[w] ^= b.data()[w];
    return c;
}

std::size_t rank(const BitMatrix& a) {
    BitMatrix m = a;
    std::size_t r = 0;
    for (std::size_t c = 0; c < m.cols() && r < m.rows(); ++c) {
        std::size_t pivot = r;
        while (pivot < m.rows() && !m.get(pivot, c)) ++pivot;
        if (pivot == m.rows()) continue;
        m.swap_rows(r, pivot);
        for (std::size_t i = pivot + 1; i < m.rows(); ++i)
            if (m.get(i, c)) m.xor_row(i, m, r);
        ++r;
    }
    return r;
}

BitMatrix invert(const BitMatrix& a) {
    if (a.rows() != a.cols()) throw DimensionError("invert: matrix not square");
    const std::size_t n = a.rows();
    BitMatrix m = a;
    BitMatrix inv = BitMatrix::identity(n);
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t pivot = c;
        while (pivot < n && !m.get(pivot, c)) ++pivot;
        if (pivot == n) throw NotInvertibleError("invert: singular matrix");
        m.swap_rows(c, pivot);
        inv.swap_rows(c, pivot);
        for (std::size_t i = 0; i < n; ++i) {
            if (i != c && m.get(i, c)) {
                m.xor_row(i, m, c);
                inv.xor_row(i, inv, c);
            }
        }
    }
    return inv;
}

BitMatrix random_full_rank(std::size_t rows, std::size_t cols, Rng& rng) {
    const std::size_t target = std::min(rows, cols);
    for (;;) {
        BitMatrix m = BitMatrix::random(rows, cols, rng);
        if (rank(m) == target) return m;
    }
}

BitMatrix remove_columns(const BitMatrix& a, const std::vector<std::size_t>& cols) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
        if (cols[i] >= a.cols())
            throw InvariantError("remove_columns: index out of range");
        if (i > 0 && cols[i] <= cols[i - 1])
            throw InvariantError("remove_columns: indices must be sorted and distinct");
    }
    if (cols.size() >= a.cols())
        throw InvariantError("remove_columns: would remove every column");
    BitMatrix out(a.rows(), a.cols() - cols.size());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        std::size_t next = 0, dst = 0;
        for (std::size_t c = 0; c < a.cols(); ++c) {
            if (next < cols.size() && cols[next] == c) {
                ++next;
                continue;
            }
            if (a.get(r, c)) out.set(r, dst, true);
            ++dst;
        }
    }
    return out;
}

BitVector mul_vec(const BitMatrix& a, const BitVector& v, std::uint64_t* macs) {
    if (a.cols() != v.size())
        throw DimensionError("mul_vec: " + std::to_string(a.rows()) + "x" +
                             std::to_string(a.cols()) + " * vec[" +
                             std::to_string(v.size()) + "]");
    BitVector y(a.rows());
    const std::size_t nw = v.word_count();
    for (std::size_t r = 0; r < a.rows(); ++r) {
        const word* row = a.row_data(r);
        word acc = 0;
        for (std::size_t w = 0; w < nw; ++w) acc ^= row[w] & v.data()[w];
        y.set(r, std::popcount(acc) & 1);
    }
    if (macs) *macs += static_cast<std::uint64_t>(a.rows()) * a.cols();
    return y;
}

namespace {

void put_u32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 24));
}

std::uint32_t get_u32le(const std::vector<std::uint8_t>& in, std::size_t& off) {
    if (off + 4 > in.size()) throw ParseError("truncated u32 field", off);
    std::uint32_t v = static_cast<std::uint32_t>(in[off]) |
                      static_cast<std::uint32_t>(in[off + 1]) << 8 |
                      static_cast<std::uint32_t>(in[off + 2]) << 16 |
                      static_cast<std::uint32_t>(in[off + 3]) << 24;
    off += 4;
    return v;
}

constexpr char kMagic[4] = {'G', 'F', '2', 'M'};
constexpr std::uint8_t kVersion = 1;

}  // namespace

void write_matrix(std::vector<std::uint8_t>& out, const BitMatrix& m) {
    out.insert(out.end(), kMagic, kMagic + 4);
    out.push_back(kVersion);
    put_u32le(out, static_cast<std::uint32_t>(m.rows()));
    put_u32le(out, static_cast<std::uint32_t>(m.cols()));
    const std::size_t row_bytes = (m.cols() + 7) / 8;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const word* row = m.row_data(r);
        for (std::size_t b = 0; b < row_bytes; ++b)
            out.push_back(
                static_cast<std::uint8_t>(row[b / 8] >> (8 * (b % 8))));
    }
}

BitMatrix read_matrix(const std::vector<std::uint8_t>& in, std::size_t& offset) {
    std::size_t off = offset;
    if (off + 4 > in.size()) throw ParseError("truncated matrix magic", off);
    if (!std::equal(kMagic, kMagic + 4, in.begin() + static_cast<std::ptrdiff_t>(off)))
        throw ParseError("bad matrix magic", off);
    off += 4;
    if (off >= in.size()) throw ParseError("truncated matrix version", off);
    if (in[off] != kVersion)
        throw ParseError("unsupported matrix version " + std::to_string(in[off]), off);
    ++off;
    const std::uint32_t rows = get_u32le(in, off);
    const std::uint32_t cols = get_u32le(in, off);
    if (rows == 0 || cols == 0) throw ParseError("zero matrix dimension", off - 8);
    const std::size_t row_bytes = (static_cast<std::size_t>(cols) + 7) / 8;
    const std::size_t payload = static_cast<std::size_t>(rows) * row_bytes;
    if (off + payload > in.size())
        throw ParseError("truncated matrix payload", in.size());
    BitMatrix m(rows, cols);
    const word tm = tail_mask(cols);
    for (std::size_t r = 0; r < rows; ++r) {
        word* row = m.row_data(r);
        for (std::size_t b = 0; b < row_bytes; ++b)
            row[b / 8] |= static_cast<word>(in[off + r * row_bytes + b])
                          << (8 * (b % 8));
        if ((row[m.words_per_row() - 1] & ~tm) != 0)
            throw ParseError("nonzero padding bits in matrix row",
                             off + r * row_bytes + row_bytes - 1);
    }
    offset = off + payload;
    return m;
}

void write_vector(std::vector<std::uint8_t>& out, const BitVector& v) {
    BitMatrix m(1, v.size());
    for (std::size_t w = 0; w < v.word_count(); ++w) m.row_data(0)[w] = v.data()[w];
    write_matrix(out, m);
}

BitVector read_vector(const std::vector<std::uint8_t>& in, std::size_t& offset) {
    const std::size_t start = offset;
    BitMatrix m = read_matrix(in, offset);
    if (m.rows() != 1) throw ParseError("expected a 1-row vector block", start);
    BitVector v(m.cols());
    for (std::size_t w = 0; w < v.word_count(); ++w) v.data()[w] = m.row_data(0)[w];
    return v;
}

}  // namespace maskem::gf2
