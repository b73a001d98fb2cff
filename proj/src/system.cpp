#include "sbmor/system.hpp"

#include <sstream>

#include <Eigen/Eigenvalues>

#include "sbmor/errors.hpp"

namespace sbmor {

std::string ValidationReport::joined() const {
    std::ostringstream out;
    for (std::size_t i = 0; i < violations.size(); ++i) {
        if (i) out << "; ";
        out << violations[i];
    }
    return out.str();
}

namespace {

bool all_finite(const Eigen::MatrixXd& M) { return M.allFinite(); }

void check_square(const Eigen::MatrixXd& M, Eigen::Index n,
                  const std::string& name, ValidationReport& report) {
    if (M.rows() != n || M.cols() != n) {
        std::ostringstream msg;
        msg << name << " must be " << n << "x" << n << ", got " << M.rows()
            << "x" << M.cols();
        report.violations.push_back(msg.str());
    }
}

} // namespace

ValidationReport validate(const BilinearStochasticSystem& sys) {
    ValidationReport report;
    const Eigen::Index n = sys.A.rows();

    if (n < 1) report.violations.push_back("state dimension must be >= 1");
    if (sys.A.rows() != sys.A.cols())
        report.violations.push_back("A must be square");
    if (sys.B.rows() != n)
        report.violations.push_back("B row count differs from state dimension");
    if (sys.C.cols() != n)
        report.violations.push_back("C column count differs form state dimension");
    if (static_cast<Eigen::Index>(sys.N.size()) != sys.B.cols())
        report.violations.push_back("N length mismatch: need one matrix per input");
    if (sys.K.rows() != sys.K.cols())
        report.violations.push_back("K must be square");
    if (static_cast<Eigen::Index>(sys.H.size()) != sys.K.rows())
        report.violations.push_back("H length mismatch: need one matrix per noise channel");

    for (std::size_t k = 0; k < sys.N.size(); ++k)
        check_square(sys.N[k], n, "N[" + std::to_string(k) + "]", report);
    for (std::size_t i = 0; i < sys.H.size(); ++i)
        check_square(sys.H[i], n, "H[" + std::to_string(i) + "]", report);

    if (!all_finite(sys.A) || !all_finite(sys.B) || !all_finite(sys.C) ||
        !all_finite(sys.K))
        report.violations.push_back("non-finite entries");
    for (const auto& M : sys.N)
        if (!all_finite(M)) report.violations.push_back("non-finite entries in N");
    for (const auto& M : sys.H)
        if (!all_finite(M)) report.violations.push_back("non-finite entries in H");

    if (sys.K.size() > 0 && sys.K.rows() == sys.K.cols() && all_finite(sys.K)) {
        const double asym = (sys.K - sys.K.transpose()).norm();
        if (asym > 1e-12 * std::max(1.0, sys.K.norm()))
            report.violations.push_back("K not symmetric");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
            0.5 * (sys.K + sys.K.transpose()));
        if (eig.eigenvalues().minCoeff() < -1e-12 * std::max(1.0, sys.K.norm()))
            report.violations.push_back("K not PSD");
    }

    return report;
}

void require_valid(const BilinearStochasticSystem& sys) {
    const ValidationReport report = validate(sys);
    if (!report.ok())
        throw InvalidSystemError("invalid system: " + report.joined());
}

} // namespace sbmor
