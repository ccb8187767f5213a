#include "groupinv/gradcheck.hpp"

#include <cmath>

namespace groupinv {

namespace {

double eval_scalar(const ScalarFn& f, const std::vector<Matrix>& params) {
    Tape tape;
    std::vector<TapeValue> ids;
    ids.reserve(params.size());
    for (const Matrix& p : params) ids.push_back(tape.parameter(p));
    TapeValue out = f(tape, ids);
    const Matrix& v = tape.value(out);
    if (v.rows != 1 || v.cols != 1) {
        throw ContractError("check_gradients expects a scalar-valued function");
    }
    return v.data[0];
}

}  // namespace

GradCheckReport check_gradients(const ScalarFn& f, const std::vector<Matrix>& params, double h,
                                double tol) {
    if (h <= 0.0) throw ContractError("check_gradients requires h > 0");
    if (tol <= 0.0) throw ContractError("check_gradients requires tol > 0");

    // Analytic gradients in one reverse sweep.
    Tape tape;
    std::vector<TapeValue> ids;
    ids.reserve(params.size());
    for (const Matrix& p : params) ids.push_back(tape.parameter(p));
    TapeValue out = f(tape, ids);
    std::vector<Matrix> analytic = backward(tape, out, ids);

    GradCheckReport report;
    std::vector<Matrix> work = params;
    for (size_t pi = 0; pi < params.size(); ++pi) {
        for (size_t e = 0; e < params[pi].data.size(); ++e) {
            const double orig = work[pi].data[e];
            work[pi].data[e] = orig + h;
            const double fp = eval_scalar(f, work);
            work[pi].data[e] = orig - h;
            const double fm = eval_scalar(f, work);
            work[pi].data[e] = orig;

            const double numeric = (fp - fm) / (2.0 * h);
            const double a = analytic[pi].data[e];
            const double denom = std::max({1.0, std::fabs(a), std::fabs(numeric)});
            const double rel = std::fabs(a - numeric) / denom;
            ++report.entries_checked;
            if (rel > report.max_rel_error) {
                report.max_rel_error = rel;
                report.worst = GradCheckEntry{static_cast<int>(pi), static_cast<int>(e), a,
                                              numeric, rel};
            }
        }
    }
    report.pass = report.max_rel_error <= tol;
    return report;
}

}  // namespace groupinv
