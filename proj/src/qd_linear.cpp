#include <Eigen/SVD>

#include "fatoulab/qd.hpp"

namespace fatou {

namespace {

Eigen::VectorXd svd_values(const Eigen::MatrixXcd& m) {
    if (m.rows() == 0 || m.cols() == 0) return {};
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
    return svd.singularValues();
}

}  // namespace

std::vector<double> singular_values(const Matrix<Complex>& m) {
    Eigen::MatrixXcd a(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = to_cd(m(i, j));
    const Eigen::VectorXd s = svd_values(a);
    return {s.data(), s.data() + s.size()};
}

double sampled_gram_condition(const std::vector<RationalQD>& elems, const std::vector<Complex>& zs) {
    if (elems.empty()) return 1.0;
    Eigen::MatrixXcd a(static_cast<Eigen::Index>(zs.size()), static_cast<Eigen::Index>(elems.size()));
    for (std::size_t j = 0; j < elems.size(); ++j)
        for (std::size_t i = 0; i < zs.size(); ++i)
            a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = elems[j].eval_cd(to_cd(zs[i]));
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
        const double n = a.col(j).norm();
        if (n > 0) a.col(j) /= n;
    }
    const Eigen::VectorXd s = svd_values(a);
    const double lo = s(s.size() - 1);
    return lo > 0 ? s(0) / lo : std::numeric_limits<double>::infinity();
}

}  // namespace fatou
