#ifndef OPMOD_POLYNOMIAL_HPP
#define OPMOD_POLYNOMIAL_HPP

#include <Eigen/Dense>
#include <initializer_list>

namespace opmod {

// Dense univariate polynomial, coefficients in ascending powers of x.
struct Polynomial {
    Eigen::VectorXd c;

    Polynomial() : c(Eigen::VectorXd::Zero(1)) {}
    explicit Polynomial(Eigen::VectorXd coeffs) : c(std::move(coeffs)) {
        if (c.size() == 0) c = Eigen::VectorXd::Zero(1);
    }
    Polynomial(std::initializer_list<double> coeffs)
        : c(Eigen::Map<const Eigen::VectorXd>(coeffs.begin(),
                                              static_cast<Eigen::Index>(coeffs.size()))) {
        if (c.size() == 0) c = Eigen::VectorXd::Zero(1);
    }

    static Polynomial constant(double v) { return Polynomial{v}; }

    // Degree after stripping a numerically zero tail.
    int degree() const {
        int d = static_cast<int>(c.size()) - 1;
        while (d > 0 && c[d] == 0.0) --d;
        return d;
    }

    double eval(double x) const {
        double r = 0.0;
        for (Eigen::Index k = c.size() - 1; k >= 0; --k) r = r * x + c[k];
        return r;
    }

    Polynomial derivative() const {
        if (c.size() <= 1) return Polynomial{0.0};
        Eigen::VectorXd d(c.size() - 1);
        for (Eigen::Index k = 1; k < c.size(); ++k) d[k - 1] = k * c[k];
        return Polynomial(std::move(d));
    }

    friend Polynomial operator*(const Polynomial& p, const Polynomial& q) {
        Eigen::VectorXd r = Eigen::VectorXd::Zero(p.c.size() + q.c.size() - 1);
        for (Eigen::Index i = 0; i < p.c.size(); ++i)
            for (Eigen::Index j = 0; j < q.c.size(); ++j) r[i + j] += p.c[i] * q.c[j];
        return Polynomial(std::move(r));
    }

    friend Polynomial operator+(const Polynomial& p, const Polynomial& q) {
        Eigen::VectorXd r = Eigen::VectorXd::Zero(std::max(p.c.size(), q.c.size()));
        r.head(p.c.size()) = p.c;
        r.head(q.c.size()) += q.c;
        return Polynomial(std::move(r));
    }

    friend Polynomial operator-(const Polynomial& p, const Polynomial& q) {
        return p + (q * Polynomial{-1.0});
    }

    friend Polynomial operator*(double s, const Polynomial& p) { return Polynomial{s} * p; }
};

}  // namespace opmod

#endif
