#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

namespace edgebench {

/// View of one compressed row: ascending column indices and their nonzero values.
struct SparseRow {
    std::span<const std::uint32_t> indices;
    std::span<const double> values;
    std::size_t length = 0;  ///< logical (dense) row length

    std::size_t nnz() const { return values.size(); }
};

/**
 * Compressed sparse row matrix. Each nonzero costs one 32-bit column index
 * plus one 64-bit value. Construction validates that column indices are
 * strictly increasing per row and that no stored value is zero.
 */
class SparseMatrix {
public:
    SparseMatrix() = default;
    SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_offsets,
                 std::vector<std::uint32_t> column_indices, std::vector<double> values);

    static SparseMatrix from_dense(std::span<const double> dense, std::size_t rows, std::size_t cols);

    std::vector<double> to_dense() const;
    SparseRow row(std::size_t i) const;

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t nnz() const { return values_.size(); }

    const std::vector<std::size_t>& row_offsets() const { return offsets_; }
    const std::vector<std::uint32_t>& column_indices() const { return indices_; }
    const std::vector<double>& values() const { return values_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::size_t> offsets_{0};
    std::vector<std::uint32_t> indices_;
    std::vector<double> values_;
};

/**
 * Dot product of a sparse row with a dense vector. Performs exactly
 * `row.nnz()` multiply-adds, reported through `multiply_adds` when given.
 * Throws ConfigError when the vector length differs from the row length.
 */
double sparse_dot(const SparseRow& row, std::span<const double> v, std::size_t* multiply_adds = nullptr);

/// Row-major sample matrix backed by either dense storage or CSR.
class FeatureMatrix {
public:
    FeatureMatrix() = default;

    static FeatureMatrix dense(std::vector<double> data, std::size_t rows, std::size_t cols);
    static FeatureMatrix sparse(SparseMatrix matrix);

    bool is_sparse() const { return std::holds_alternative<SparseMatrix>(storage_); }
    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    /// Row i dotted with w (length cols()).
    double dot(std::size_t i, std::span<const double> w) const;
    /// out += alpha * row i.
    void add_scaled_row(std::size_t i, double alpha, std::span<double> out) const;
    /// Squared Euclidean distance between row i of this and row j of other.
    /// Bit-identical whichever storage either side uses.
    double squared_distance(std::size_t i, const FeatureMatrix& other, std::size_t j) const;
    void copy_row(std::size_t i, std::span<double> out) const;

    /// Only valid for dense storage.
    std::span<const double> dense_row(std::size_t i) const;
    const std::vector<double>& dense_data() const;
    const SparseMatrix& sparse_data() const;

    FeatureMatrix to_dense() const;
    FeatureMatrix to_sparse() const;
    FeatureMatrix select_rows(std::span<const std::size_t> rows) const;

    std::size_t nonzeros() const;
    double zero_fraction() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::variant<std::vector<double>, SparseMatrix> storage_;
};

}  // namespace edgebench
