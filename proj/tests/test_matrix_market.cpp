#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "sh2/matrix_market.hpp"

using namespace sh2;
namespace fs = std::filesystem;

namespace {

std::string temp_file(const std::string& name) {
    return (fs::temp_directory_path() / name).string();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

}  // namespace

TEST_CASE("sparse roundtrip") {
    Eigen::SparseMatrix<double> m(4, 3);
    m.insert(0, 0) = 1.5;
    m.insert(2, 1) = -2.25;
    m.insert(3, 2) = 1e-12;
    m.makeCompressed();
    const std::string path = temp_file("sh2_mm_sparse.mtx");
    write_matrix_market(m, path);
    const Eigen::SparseMatrix<double> back = read_matrix_market_sparse(path);
    CHECK((Eigen::MatrixXd(back) - Eigen::MatrixXd(m)).norm() == 0.0);
    fs::remove(path);
}

TEST_CASE("dense roundtrip") {
    Eigen::MatrixXd m(2, 3);
    m << 1, 2, 3, 4, 5, 0.5;
    const std::string path = temp_file("sh2_mm_dense.mtx");
    write_matrix_market(m, path);
    CHECK((read_matrix_market_dense(path) - m).norm() == 0.0);
    fs::remove(path);
}

TEST_CASE("symmetric coordinate files are mirrored") {
    const std::string path = temp_file("sh2_mm_sym.mtx");
    write_text(path,
               "%%MatrixMarket matrix coordinate real symmetric\n"
               "% a comment line\n"
               "3 3 3\n"
               "1 1 2.0\n"
               "2 1 -1.0\n"
               "3 3 4.0\n");
    const Eigen::MatrixXd m = read_matrix_market_dense(path);
    CHECK(m(0, 1) == -1.0);
    CHECK(m(1, 0) == -1.0);
    CHECK(m(0, 0) == 2.0);
    CHECK(m(2, 2) == 4.0);
    fs::remove(path);
}

TEST_CASE("malformed files are rejected") {
    const std::string path = temp_file("sh2_mm_bad.mtx");
    SUBCASE("wrong banner") {
        write_text(path, "%%NotMatrixMarket matrix coordinate real general\n1 1 1\n1 1 1.0\n");
        CHECK_THROWS((void)read_matrix_market_sparse(path));
    }
    SUBCASE("complex field unsupported") {
        write_text(path,
                   "%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1.0 0.0\n");
        CHECK_THROWS((void)read_matrix_market_sparse(path));
    }
    SUBCASE("index out of range") {
        write_text(path, "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n");
        CHECK_THROWS((void)read_matrix_market_sparse(path));
    }
    SUBCASE("truncated entries") {
        write_text(path, "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n");
        CHECK_THROWS((void)read_matrix_market_sparse(path));
    }
    SUBCASE("missing file") {
        CHECK_THROWS((void)read_matrix_market_sparse(temp_file("sh2_mm_does_not_exist.mtx")));
    }
    fs::remove(path);
}
