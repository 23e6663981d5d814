#include "edgebench/sparse.hpp"

#include <algorithm>
#include <string>

#include "edgebench/common.hpp"

namespace edgebench {

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_offsets,
                           std::vector<std::uint32_t> column_indices, std::vector<double> values)
    : rows_(rows), cols_(cols), offsets_(std::move(row_offsets)), indices_(std::move(column_indices)),
      values_(std::move(values)) {
    if (offsets_.size() != rows_ + 1 || offsets_.front() != 0 || offsets_.back() != values_.size() ||
        indices_.size() != values_.size()) {
        throw DataError("sparse matrix: inconsistent row offsets");
    }
    for (std::size_t r = 0; r < rows_; ++r) {
        if (offsets_[r] > offsets_[r + 1]) {
            throw DataError("sparse matrix: decreasing row offsets at row " + std::to_string(r));
        }
        for (std::size_t k = offsets_[r]; k < offsets_[r + 1]; ++k) {
            if (indices_[k] >= cols_) {
                throw DataError("sparse matrix: column index out of range in row " + std::to_string(r));
            }
            if (k > offsets_[r] && indices_[k] <= indices_[k - 1]) {
                throw DataError("sparse matrix: column indices not strictly increasing in row " + std::to_string(r));
            }
            if (values_[k] == 0.0) {
                throw DataError("sparse matrix: explicit zero stored in row " + std::to_string(r));
            }
        }
    }
}

SparseMatrix SparseMatrix::from_dense(std::span<const double> dense, std::size_t rows, std::size_t cols) {
    if (dense.size() != rows * cols) {
        throw ConfigError("from_dense: data length does not match shape");
    }
    std::vector<std::size_t> offsets;
    offsets.reserve(rows + 1);
    offsets.push_back(0);
    std::vector<std::uint32_t> idx;
    std::vector<double> val;
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = dense.data() + r * cols;
        for (std::size_t c = 0; c < cols; ++c) {
            if (row[c] != 0.0) {
                idx.push_back(static_cast<std::uint32_t>(c));
                val.push_back(row[c]);
            }
        }
        offsets.push_back(val.size());
    }
    return SparseMatrix(rows, cols, std::move(offsets), std::move(idx), std::move(val));
}

std::vector<double> SparseMatrix::to_dense() const {
    std::vector<double> out(rows_ * cols_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t k = offsets_[r]; k < offsets_[r + 1]; ++k) {
            out[r * cols_ + indices_[k]] = values_[k];
        }
    }
    return out;
}

SparseRow SparseMatrix::row(std::size_t i) const {
    const std::size_t b = offsets_[i];
    const std::size_t n = offsets_[i + 1] - b;
    return SparseRow{std::span<const std::uint32_t>(indices_.data() + b, n),
                     std::span<const double>(values_.data() + b, n), cols_};
}

double sparse_dot(const SparseRow& row, std::span<const double> v, std::size_t* multiply_adds) {
    if (v.size() != row.length) {
        throw ConfigError("sparse_dot: vector length " + std::to_string(v.size()) + " != row length " +
                          std::to_string(row.length));
    }
    double acc = 0.0;
    for (std::size_t k = 0; k < row.values.size(); ++k) {
        acc += row.values[k] * v[row.indices[k]];
    }
    if (multiply_adds != nullptr) {
        *multiply_adds = row.values.size();
    }
    return acc;
}

FeatureMatrix FeatureMatrix::dense(std::vector<double> data, std::size_t rows, std::size_t cols) {
    if (data.size() != rows * cols) {
        throw ConfigError("FeatureMatrix: data length does not match shape");
    }
    FeatureMatrix m;
    m.rows_ = rows;
    m.cols_ = cols;
    m.storage_ = std::move(data);
    return m;
}

FeatureMatrix FeatureMatrix::sparse(SparseMatrix matrix) {
    FeatureMatrix m;
    m.rows_ = matrix.rows();
    m.cols_ = matrix.cols();
    m.storage_ = std::move(matrix);
    return m;
}

double FeatureMatrix::dot(std::size_t i, std::span<const double> w) const {
    if (const auto* s = std::get_if<SparseMatrix>(&storage_)) {
        return sparse_dot(s->row(i), w);
    }
    const auto row = dense_row(i);
    double acc = 0.0;
    for (std::size_t c = 0; c < cols_; ++c) {
        acc += row[c] * w[c];
    }
    return acc;
}

void FeatureMatrix::add_scaled_row(std::size_t i, double alpha, std::span<double> out) const {
    if (const auto* s = std::get_if<SparseMatrix>(&storage_)) {
        const SparseRow r = s->row(i);
        for (std::size_t k = 0; k < r.nnz(); ++k) {
            out[r.indices[k]] += alpha * r.values[k];
        }
        return;
    }
    const auto row = dense_row(i);
    for (std::size_t c = 0; c < cols_; ++c) {
        out[c] += alpha * row[c];
    }
}

double FeatureMatrix::squared_distance(std::size_t i, const FeatureMatrix& other, std::size_t j) const {
    if (cols_ != other.cols_) {
        throw ConfigError("squared_distance: column count mismatch");
    }
    const auto* sa = std::get_if<SparseMatrix>(&storage_);
    const auto* sb = std::get_if<SparseMatrix>(&other.storage_);
    double acc = 0.0;
    // Terms where both operands are zero are skipped; adding +0.0 would not change the sum.
    if (sa == nullptr && sb == nullptr) {
        const auto a = dense_row(i);
        const auto b = other.dense_row(j);
        for (std::size_t c = 0; c < cols_; ++c) {
            const double d = a[c] - b[c];
            acc += d * d;
        }
    } else if (sa != nullptr && sb != nullptr) {
        const SparseRow a = sa->row(i);
        const SparseRow b = sb->row(j);
        std::size_t p = 0;
        std::size_t q = 0;
        while (p < a.nnz() || q < b.nnz()) {
            double d;
            if (q == b.nnz() || (p < a.nnz() && a.indices[p] < b.indices[q])) {
                d = a.values[p++];
            } else if (p == a.nnz() || b.indices[q] < a.indices[p]) {
                d = -b.values[q++];
            } else {
                d = a.values[p++] - b.values[q++];
            }
            acc += d * d;
        }
    } else {
        const bool a_sparse = sa != nullptr;
        const SparseRow s = a_sparse ? sa->row(i) : sb->row(j);
        const auto dense = a_sparse ? other.dense_row(j) : dense_row(i);
        std::size_t p = 0;
        for (std::size_t c = 0; c < cols_; ++c) {
            double sv = 0.0;
            if (p < s.nnz() && s.indices[p] == c) {
                sv = s.values[p++];
            }
            const double d = a_sparse ? sv - dense[c] : dense[c] - sv;
            acc += d * d;
        }
    }
    return acc;
}

void FeatureMatrix::copy_row(std::size_t i, std::span<double> out) const {
    if (const auto* s = std::get_if<SparseMatrix>(&storage_)) {
        std::fill(out.begin(), out.end(), 0.0);
        const SparseRow r = s->row(i);
        for (std::size_t k = 0; k < r.nnz(); ++k) {
            out[r.indices[k]] = r.values[k];
        }
        return;
    }
    const auto row = dense_row(i);
    std::copy(row.begin(), row.end(), out.begin());
}

std::span<const double> FeatureMatrix::dense_row(std::size_t i) const {
    const auto& d = std::get<std::vector<double>>(storage_);
    return std::span<const double>(d.data() + i * cols_, cols_);
}

const std::vector<double>& FeatureMatrix::dense_data() const {
    return std::get<std::vector<double>>(storage_);
}

const SparseMatrix& FeatureMatrix::sparse_data() const {
    return std::get<SparseMatrix>(storage_);
}

FeatureMatrix FeatureMatrix::to_dense() const {
    if (const auto* s = std::get_if<SparseMatrix>(&storage_)) {
        return dense(s->to_dense(), rows_, cols_);
    }
    return *this;
}

FeatureMatrix FeatureMatrix::to_sparse() const {
    if (is_sparse()) {
        return *this;
    }
    return sparse(SparseMatrix::from_dense(dense_data(), rows_, cols_));
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> rows) const {
    if (const auto* s = std::get_if<SparseMatrix>(&storage_)) {
        std::vector<std::size_t> offsets{0};
        std::vector<std::uint32_t> idx;
        std::vector<double> val;
        for (const std::size_t r : rows) {
            const SparseRow row = s->row(r);
            idx.insert(idx.end(), row.indices.begin(), row.indices.end());
            val.insert(val.end(), row.values.begin(), row.values.end());
            offsets.push_back(val.size());
        }
        return sparse(SparseMatrix(rows.size(), cols_, std::move(offsets), std::move(idx), std::move(val)));
    }
    std::vector<double> out;
    out.reserve(rows.size() * cols_);
    for (const std::size_t r : rows) {
        const auto row = dense_row(r);
        out.insert(out.end(), row.begin(), row.end());
    }
    return dense(std::move(out), rows.size(), cols_);
}

std::size_t FeatureMatrix::nonzeros() const {
    if (const auto* s = std::get_if<SparseMatrix>(&storage_)) {
        return s->nnz();
    }
    std::size_t n = 0;
    for (const double v : dense_data()) {
        n += v != 0.0 ? 1 : 0;
    }
    return n;
}

double FeatureMatrix::zero_fraction() const {
    const std::size_t total = rows_ * cols_;
    return total == 0 ? 0.0 : 1.0 - static_cast<double>(nonzeros()) / static_cast<double>(total);
}

}  // namespace edgebench
