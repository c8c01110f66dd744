#include <cmath>
#include <limits>
#include <stdexcept>

#include "micon/errors.hpp"
#include "micon/eval.hpp"

namespace micon::eval {

namespace {

// continued fraction for the incomplete beta (Lentz's method)
double beta_cf(double a, double b, double x) {
    constexpr int kMaxIter = 500;
    constexpr double kEps = 1e-14;
    constexpr double kTiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) return h;
    }
    throw EvalError("incomplete beta continued fraction failed to converge");
}

}  // namespace

double reg_inc_beta(double a, double b, double x) {
    if (a <= 0.0 || b <= 0.0) throw std::invalid_argument("reg_inc_beta: a, b must be > 0");
    if (x < 0.0 || x > 1.0) throw std::invalid_argument("reg_inc_beta: x must be in [0, 1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    // use the better-converging side of the symmetry I_x(a,b) = 1 - I_{1-x}(b,a)
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_sf(double t, double dof) {
    if (dof <= 0.0) throw std::invalid_argument("student_t_sf: dof must be > 0");
    if (std::isinf(t)) return t > 0.0 ? 0.0 : 1.0;
    const double x = dof / (dof + t * t);
    const double half_two_sided = 0.5 * reg_inc_beta(0.5 * dof, 0.5, x);
    return t >= 0.0 ? half_two_sided : 1.0 - half_two_sided;
}

double f_sf(double f, double d1, double d2) {
    if (d1 <= 0.0 || d2 <= 0.0) throw std::invalid_argument("f_sf: dof must be > 0");
    if (f <= 0.0) return 1.0;
    if (std::isinf(f)) return 0.0;
    return reg_inc_beta(0.5 * d2, 0.5 * d1, d2 / (d2 + d1 * f));
}

std::pair<double, double> t_test_one_tailed(const std::vector<double>& a,
                                            const std::vector<double>& b) {
    const size_t na = a.size(), nb = b.size();
    if (na < 2 || nb < 2) throw EvalError("t_test_one_tailed: need >= 2 samples per group");
    double ma = 0.0, mb = 0.0;
    for (double v : a) ma += v;
    for (double v : b) mb += v;
    ma /= static_cast<double>(na);
    mb /= static_cast<double>(nb);
    double ssa = 0.0, ssb = 0.0;
    for (double v : a) ssa += (v - ma) * (v - ma);
    for (double v : b) ssb += (v - mb) * (v - mb);
    const double dof = static_cast<double>(na + nb - 2);
    const double pooled_var = (ssa + ssb) / dof;
    if (pooled_var == 0.0) {
        // degenerate: no within-group variance
        if (ma == mb) return {0.0, 0.5};
        const double inf = std::numeric_limits<double>::infinity();
        return ma > mb ? std::make_pair(inf, 0.0) : std::make_pair(-inf, 1.0);
    }
    const double se = std::sqrt(pooled_var * (1.0 / na + 1.0 / nb));
    const double t = (ma - mb) / se;
    return {t, student_t_sf(t, dof)};
}

std::pair<double, double> rm_anova(const math::Matrix& table) {
    const size_t n = table.rows, k = table.cols;
    if (n < 2 || k < 2) throw EvalError("rm_anova: need >= 2 subjects and >= 2 conditions");
    if (!table.all_finite()) throw EvalError("rm_anova: table must be finite and complete");

    double grand = 0.0;
    std::vector<double> subj(n, 0.0), cond(k, 0.0);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < k; ++j) {
            grand += table(i, j);
            subj[i] += table(i, j);
            cond[j] += table(i, j);
        }
    grand /= static_cast<double>(n * k);
    for (auto& s : subj) s /= static_cast<double>(k);
    for (auto& c : cond) c /= static_cast<double>(n);

    double ss_cond = 0.0;
    for (double c : cond) ss_cond += (c - grand) * (c - grand);
    ss_cond *= static_cast<double>(n);

    double ss_err = 0.0;
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < k; ++j) {
            const double r = table(i, j) - subj[i] - cond[j] + grand;
            ss_err += r * r;
        }

    const double df_cond = static_cast<double>(k - 1);
    const double df_err = static_cast<double>((n - 1) * (k - 1));
    if (ss_cond == 0.0) return {0.0, 1.0};  // no condition effect at all
    if (ss_err == 0.0) {
        // perfect additivity: the effect is exact, saturate
        return {std::numeric_limits<double>::infinity(), 0.0};
    }
    const double f = (ss_cond / df_cond) / (ss_err / df_err);
    return {f, f_sf(f, df_cond, df_err)};
}

}  // namespace micon::eval
