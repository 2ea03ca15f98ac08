#include "sh2/matrix_market.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace sh2 {

namespace {

struct MmHeader {
    bool coordinate = true;
    bool symmetric = false;
};

MmHeader read_header(std::istream& in, const std::string& path) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    std::istringstream hs(line);
    std::string banner, object, format, field, symmetry;
    hs >> banner >> object >> format >> field >> symmetry;
    std::transform(format.begin(), format.end(), format.begin(), ::tolower);
    std::transform(field.begin(), field.end(), field.begin(), ::tolower);
    std::transform(symmetry.begin(), symmetry.end(), symmetry.begin(), ::tolower);
    if (banner != "%%MatrixMarket" || object != "matrix")
        throw std::runtime_error(path + ": not a Matrix Market matrix file");
    if (field != "real" && field != "integer" && field != "double")
        throw std::runtime_error(path + ": only real matrices are supported");
    MmHeader h;
    if (format == "coordinate")
        h.coordinate = true;
    else if (format == "array")
        h.coordinate = false;
    else
        throw std::runtime_error(path + ": unknown format '" + format + "'");
    if (symmetry == "symmetric")
        h.symmetric = true;
    else if (symmetry != "general")
        throw std::runtime_error(path + ": unsupported symmetry '" + symmetry + "'");
    return h;
}

void skip_comments(std::istream& in, std::string& line) {
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] != '%') return;
    }
    line.clear();
}

}  // namespace

Eigen::SparseMatrix<double> read_matrix_market_sparse(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    const MmHeader h = read_header(in, path);
    std::string line;
    skip_comments(in, line);
    std::istringstream sizes(line);
    long rows = 0, cols = 0, nnz = 0;
    if (h.coordinate) {
        if (!(sizes >> rows >> cols >> nnz)) throw std::runtime_error(path + ": bad size line");
    } else {
        if (!(sizes >> rows >> cols)) throw std::runtime_error(path + ": bad size line");
        nnz = rows * cols;
    }
    if (rows < 1 || cols < 1) throw std::runtime_error(path + ": invalid dimensions");

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(h.symmetric ? 2 * nnz : nnz));
    if (h.coordinate) {
        for (long k = 0; k < nnz; ++k) {
            long i = 0, j = 0;
            double v = 0.0;
            if (!(in >> i >> j >> v)) throw std::runtime_error(path + ": truncated entries");
            if (i < 1 || i > rows || j < 1 || j > cols)
                throw std::runtime_error(path + ": index out of range");
            triplets.emplace_back(static_cast<int>(i - 1), static_cast<int>(j - 1), v);
            if (h.symmetric && i != j)
                triplets.emplace_back(static_cast<int>(j - 1), static_cast<int>(i - 1), v);
        }
    } else {
        for (long j = 0; j < cols; ++j) {
            for (long i = 0; i < rows; ++i) {
                double v = 0.0;
                if (!(in >> v)) throw std::runtime_error(path + ": truncated entries");
                if (v != 0.0)
                    triplets.emplace_back(static_cast<int>(i), static_cast<int>(j), v);
            }
        }
    }
    Eigen::SparseMatrix<double> m(static_cast<int>(rows), static_cast<int>(cols));
    m.setFromTriplets(triplets.begin(), triplets.end());
    m.makeCompressed();
    return m;
}

Eigen::MatrixXd read_matrix_market_dense(const std::string& path) {
    return Eigen::MatrixXd(read_matrix_market_sparse(path));
}

void write_matrix_market(const Eigen::SparseMatrix<double>& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "%%MatrixMarket matrix coordinate real general\n";
    out.precision(17);
    out << m.rows() << " " << m.cols() << " " << m.nonZeros() << "\n";
    for (int k = 0; k < m.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it)
            out << it.row() + 1 << " " << it.col() + 1 << " " << it.value() << "\n";
}

void write_matrix_market(const Eigen::MatrixXd& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "%%MatrixMarket matrix array real general\n";
    out.precision(17);
    out << m.rows() << " " << m.cols() << "\n";
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) out << m(i, j) << "\n";
}

}  // namespace sh2
