#include "kh/f2.hpp"

#include <stdexcept>

namespace kh {

F2Matrix::F2Matrix(int rows, int cols)
    : rows_(rows), cols_(cols), words_per_row_((cols + 63) / 64),
      data_(static_cast<size_t>(rows) * ((cols + 63) / 64), 0) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("negative matrix dimension");
}

F2Matrix F2Matrix::identity(int n) {
    F2Matrix m(n, n);
    for (int i = 0; i < n; ++i) m.set(i, i, true);
    return m;
}

bool F2Matrix::get(int r, int c) const {
    return (data_[static_cast<size_t>(r) * words_per_row_ + c / 64] >> (c % 64)) & 1u;
}

void F2Matrix::set(int r, int c, bool v) {
    uint64_t& w = data_[static_cast<size_t>(r) * words_per_row_ + c / 64];
    uint64_t bit = uint64_t{1} << (c % 64);
    if (v)
        w |= bit;
    else
        w &= ~bit;
}

void F2Matrix::flip(int r, int c) {
    data_[static_cast<size_t>(r) * words_per_row_ + c / 64] ^= uint64_t{1} << (c % 64);
}

void F2Matrix::add_row_into(int src, int dst) {
    const uint64_t* s = &data_[static_cast<size_t>(src) * words_per_row_];
    uint64_t* d = &data_[static_cast<size_t>(dst) * words_per_row_];
    for (int w = 0; w < words_per_row_; ++w) d[w] ^= s[w];
}

F2Matrix F2Matrix::transposed() const {
    F2Matrix t(cols_, rows_);
    for (int r = 0; r < rows_; ++r)
        for (int c = 0; c < cols_; ++c)
            if (get(r, c)) t.set(c, r, true);
    return t;
}

bool F2Matrix::operator==(const F2Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_ && data_ == other.data_;
}

std::vector<uint8_t> F2Matrix::apply(const std::vector<uint8_t>& x) const {
    if (static_cast<int>(x.size()) != cols_)
        throw std::invalid_argument("F2Matrix::apply: dimension mismatch");
    std::vector<uint8_t> y(rows_, 0);
    for (int r = 0; r < rows_; ++r) {
        uint8_t acc = 0;
        for (int c = 0; c < cols_; ++c) acc ^= static_cast<uint8_t>(get(r, c) & (x[c] & 1));
        y[r] = acc;
    }
    return y;
}

F2Matrix operator*(const F2Matrix& a, const F2Matrix& b) {
    if (a.cols_ != b.rows_) throw std::invalid_argument("F2Matrix product: dimension mismatch");
    F2Matrix out(a.rows_, b.cols_);
    for (int r = 0; r < a.rows_; ++r)
        for (int k = 0; k < a.cols_; ++k)
            if (a.get(r, k)) {
                const uint64_t* src = &b.data_[static_cast<size_t>(k) * b.words_per_row_];
                uint64_t* dst = &out.data_[static_cast<size_t>(r) * out.words_per_row_];
                for (int w = 0; w < out.words_per_row_; ++w) dst[w] ^= src[w];
            }
    return out;
}

int rank(F2Matrix a) {
    int r = 0;
    for (int c = 0; c < a.cols_ && r < a.rows_; ++c) {
        int pivot = -1;
        for (int i = r; i < a.rows_; ++i)
            if (a.get(i, c)) {
                pivot = i;
                break;
            }
        if (pivot < 0) continue;
        if (pivot != r)
            for (int w = 0; w < a.words_per_row_; ++w)
                std::swap(a.data_[static_cast<size_t>(pivot) * a.words_per_row_ + w],
                          a.data_[static_cast<size_t>(r) * a.words_per_row_ + w]);
        for (int i = 0; i < a.rows_; ++i)
            if (i != r && a.get(i, c)) a.add_row_into(r, i);
        ++r;
    }
    return r;
}

std::optional<std::vector<uint8_t>> solve(const F2Matrix& a, const std::vector<uint8_t>& b) {
    if (static_cast<int>(b.size()) != a.rows_)
        throw std::invalid_argument("solve: rhs length must equal row count");
    // Augmented elimination with column pivot bookkeeping.
    F2Matrix m = a;
    std::vector<uint8_t> rhs = b;
    std::vector<int> pivot_col_of_row;
    int r = 0;
    for (int c = 0; c < m.cols_ && r < m.rows_; ++c) {
        int pivot = -1;
        for (int i = r; i < m.rows_; ++i)
            if (m.get(i, c)) {
                pivot = i;
                break;
            }
        if (pivot < 0) continue;
        if (pivot != r) {
            for (int w = 0; w < m.words_per_row_; ++w)
                std::swap(m.data_[static_cast<size_t>(pivot) * m.words_per_row_ + w],
                          m.data_[static_cast<size_t>(r) * m.words_per_row_ + w]);
            std::swap(rhs[pivot], rhs[r]);
        }
        for (int i = 0; i < m.rows_; ++i)
            if (i != r && m.get(i, c)) {
                m.add_row_into(r, i);
                rhs[i] ^= rhs[r];
            }
        pivot_col_of_row.push_back(c);
        ++r;
    }
    for (int i = r; i < m.rows_; ++i)
        if (rhs[i]) return std::nullopt;
    std::vector<uint8_t> x(a.cols_, 0);
    for (int i = 0; i < r; ++i) x[pivot_col_of_row[i]] = rhs[i];
    // Exactness check: never hand back an unverified solution.
    if (a.apply(x) != b) return std::nullopt;
    return x;
}

std::vector<std::vector<uint8_t>> kernel_basis(const F2Matrix& a) {
    F2Matrix m = a;
    std::vector<int> pivot_row_of_col(m.cols_, -1);
    int r = 0;
    for (int c = 0; c < m.cols_ && r < m.rows_; ++c) {
        int pivot = -1;
        for (int i = r; i < m.rows_; ++i)
            if (m.get(i, c)) {
                pivot = i;
                break;
            }
        if (pivot < 0) continue;
        if (pivot != r)
            for (int w = 0; w < m.words_per_row_; ++w)
                std::swap(m.data_[static_cast<size_t>(pivot) * m.words_per_row_ + w],
                          m.data_[static_cast<size_t>(r) * m.words_per_row_ + w]);
        for (int i = 0; i < m.rows_; ++i)
            if (i != r && m.get(i, c)) m.add_row_into(r, i);
        pivot_row_of_col[c] = r;
        ++r;
    }
    std::vector<std::vector<uint8_t>> basis;
    for (int c = 0; c < m.cols_; ++c) {
        if (pivot_row_of_col[c] >= 0) continue;
        std::vector<uint8_t> v(m.cols_, 0);
        v[c] = 1;
        for (int c2 = 0; c2 < m.cols_; ++c2) {
            int pr = pivot_row_of_col[c2];
            if (pr >= 0 && m.get(pr, c)) v[c2] = 1;
        }
        basis.push_back(std::move(v));
    }
    return basis;
}

int eventual_rank(const F2Matrix& t) {
    if (t.rows() != t.cols()) throw std::invalid_argument("eventual_rank: matrix must be square");
    int m = t.rows();
    if (m == 0) return 0;
    // Square until the power exponent is at least m; the image chain
    // T >= T^2 >= ... stabilizes after at most m steps.
    F2Matrix p = t;
    int exponent = 1;
    while (exponent < m) {
        p = p * p;
        exponent *= 2;
    }
    return rank(p);
}

}  // namespace kh
