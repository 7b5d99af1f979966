#ifndef KH_F2_HPP
#define KH_F2_HPP

#include <cstdint>
#include <optional>
#include <vector>

namespace kh {

/// Dense bit-packed matrix over the two-element field.
///
/// Rows are stored as 64-bit blocks. All algebra is exact; elimination
/// always works on a private copy, so instances can be shared freely
/// across threads.
class F2Matrix {
public:
    F2Matrix() = default;
    F2Matrix(int rows, int cols);

    static F2Matrix identity(int n);

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    bool get(int r, int c) const;
    void set(int r, int c, bool v);
    void flip(int r, int c);

    /// XOR row src into row dst.
    void add_row_into(int src, int dst);

    F2Matrix transposed() const;

    bool operator==(const F2Matrix& other) const;

    /// A * x where x is a column vector of length cols().
    std::vector<uint8_t> apply(const std::vector<uint8_t>& x) const;

    friend F2Matrix operator*(const F2Matrix& a, const F2Matrix& b);

private:
    int rows_ = 0;
    int cols_ = 0;
    int words_per_row_ = 0;
    std::vector<uint64_t> data_;

    friend int rank(F2Matrix a);
    friend std::optional<std::vector<uint8_t>> solve(const F2Matrix& a,
                                                     const std::vector<uint8_t>& b);
    friend std::vector<std::vector<uint8_t>> kernel_basis(const F2Matrix& a);
};

/// Rank over GF(2). Pivots are chosen leftmost-column, topmost-row, so the
/// reduction is fully deterministic.
int rank(F2Matrix a);

/// Some x with A*x = b, or nullopt when the system is inconsistent.
/// The returned vector is verified by re-multiplication before returning.
std::optional<std::vector<uint8_t>> solve(const F2Matrix& a,
                                          const std::vector<uint8_t>& b);

/// Basis of the null space; size == cols - rank.
std::vector<std::vector<uint8_t>> kernel_basis(const F2Matrix& a);

/// rank(T^m) for a square T of dimension m; this equals rank(T^k) for all
/// k >= m, i.e. the dimension of the stable image of the endomorphism.
int eventual_rank(const F2Matrix& t);

}  // namespace kh

#endif
