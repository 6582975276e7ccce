#pragma once

// Power-law interaction models, the kernel exponent map and binary collision
// geometry.

#include "error.hpp"
#include "quadrature.hpp"
#include "vec3.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace kinshock {

// Kernel exponent of an inverse-power force law |F| ~ r^(-s).
inline double gamma_from_s(double s)
{
    if (!(s > 2.0)) throw InvalidArgument("gamma_from_s: requires s > 2");
    if (std::isinf(s)) return 1.0;
    return (s - 5.0) / (s - 1.0);
}

// Inverse of gamma_from_s on (-3, 1]; gamma = 1 maps to s = inf (hard spheres).
inline double s_from_gamma(double gamma)
{
    if (!(gamma > -3.0 && gamma <= 1.0)) throw InvalidArgument("s_from_gamma: gamma must lie in (-3, 1]");
    if (gamma == 1.0) return std::numeric_limits<double>::infinity();
    return (5.0 - gamma) / (1.0 - gamma);
}

// Angular part b(cos theta) of the collision kernel. Normalized so that the
// integral over the unit sphere is 1; the isotropic default is b = 1/(4 pi).
class AngularWeight {
public:
    AngularWeight() = default;

    static AngularWeight isotropic() { return AngularWeight{}; }

    // b(t) proportional to 1 + c1 t + c2 t^2 + ..., normalized over the sphere.
    static AngularWeight polynomial(std::vector<double> coeffs)
    {
        AngularWeight a;
        bool any = false;
        for (double c : coeffs) any = any || c != 0.0;
        if (!any) return a;
        std::vector<double> full{1.0};
        full.insert(full.end(), coeffs.begin(), coeffs.end());
        // integral over S^2 of t^k is 4 pi/(k+1) for even k, 0 for odd
        double total = 0.0;
        for (std::size_t k = 0; k < full.size(); k += 2) total += full[k] * 4.0 * pi / (k + 1.0);
        detail::require(total > 0.0, "AngularWeight: polynomial has non-positive sphere integral");
        auto shared = std::make_shared<std::vector<double>>(std::move(full));
        a.fn_ = [shared, total](double t) {
            double acc = 0.0;
            for (auto it = shared->rbegin(); it != shared->rend(); ++it) acc = acc * t + *it;
            return acc / total;
        };
        std::ostringstream os;
        os.precision(17);
        os << "poly:";
        for (std::size_t k = 0; k < coeffs.size(); ++k) os << (k ? "," : "") << coeffs[k];
        a.name_ = os.str();
        // positivity on [-1,1] checked on a fine sample
        for (int i = 0; i <= 400; ++i) {
            double const t = -1.0 + i / 200.0;
            detail::require(a.fn_(t) >= 0.0, "AngularWeight: b(cos theta) must be non-negative on [-1,1]");
        }
        return a;
    }

    // Hook for an arbitrary smooth weight. The caller is responsible for the
    // normalization and positivity; `name` keys the spectral weight cache.
    static AngularWeight custom(std::function<double(double)> fn, std::string name)
    {
        AngularWeight a;
        a.fn_ = std::move(fn);
        a.name_ = std::move(name);
        return a;
    }

    bool is_isotropic() const noexcept { return !fn_; }
    std::string const& name() const noexcept { return name_; }

    double operator()(double cos_theta) const { return fn_ ? fn_(cos_theta) : 1.0 / (4.0 * pi); }

    // lambda_l = 2 pi * int_{-1}^{1} b(t) P_l(t) dt, l = 0..lmax. These are the
    // Funk-Hecke eigenvalues of the weight.
    std::vector<double> legendre_moments(int lmax) const
    {
        std::vector<double> out(lmax + 1, 0.0);
        if (is_isotropic()) {
            out[0] = 1.0;
            return out;
        }
        auto const gl = gauss_legendre(96);
        for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
            double const t = gl.nodes[i];
            double const bw = 2.0 * pi * (*this)(t) * gl.weights[i];
            double p0 = 1.0, p1 = t;
            out[0] += bw;
            if (lmax >= 1) out[1] += bw * t;
            for (int l = 2; l <= lmax; ++l) {
                double const p2 = ((2.0 * l - 1.0) * t * p1 - (l - 1.0) * p0) / l;
                p0 = p1;
                p1 = p2;
                out[l] += bw * p2;
            }
        }
        return out;
    }

private:
    std::function<double(double)> fn_;
    std::string name_ = "isotropic";
};

struct InteractionModel {
    double s = 5.0;
    double gamma = 0.0;
    AngularWeight angular{};
    double kernel_scale = 1.0;
    // floor applied to |rel| when gamma < 0; 0 means "not configured"
    double rel_floor = 0.0;

    static InteractionModel from_s(double s, AngularWeight angular = {}, double kernel_scale = 1.0)
    {
        InteractionModel m;
        m.s = s;
        m.gamma = gamma_from_s(s);
        m.angular = std::move(angular);
        m.kernel_scale = kernel_scale;
        m.validate();
        return m;
    }

    static InteractionModel from_gamma(double gamma, AngularWeight angular = {}, double kernel_scale = 1.0)
    {
        InteractionModel m;
        m.s = s_from_gamma(gamma);
        m.gamma = gamma;
        m.angular = std::move(angular);
        m.kernel_scale = kernel_scale;
        m.validate();
        return m;
    }

    static InteractionModel maxwell(double kernel_scale = 1.0) { return from_s(5.0, {}, kernel_scale); }

    void validate() const
    {
        detail::require(gamma > -3.0 && gamma <= 1.0, "InteractionModel: gamma must lie in (-3, 1]");
        detail::require(kernel_scale > 0.0 && std::isfinite(kernel_scale), "InteractionModel: kernel_scale must be positive");
        detail::require(rel_floor >= 0.0, "InteractionModel: rel_floor must be non-negative");
        if (std::isfinite(s)) {
            detail::require(s > 2.0, "InteractionModel: s must exceed 2");
            detail::require(std::abs(gamma - gamma_from_s(s)) <= 1e-12, "InteractionModel: s and gamma are inconsistent");
        }
    }

    bool is_maxwell() const noexcept { return gamma == 0.0; }

    // Copy with the relative-speed floor tied to a grid spacing.
    InteractionModel with_rel_floor(double floor) const
    {
        InteractionModel m = *this;
        m.rel_floor = floor;
        return m;
    }

    std::string describe() const
    {
        std::ostringstream os;
        os.precision(17);
        os << "s=" << s << " gamma=" << gamma << " angular=" << angular.name() << " kernel_scale=" << kernel_scale;
        return os.str();
    }
};

// Default relative-speed floor for a grid of spacing h.
inline double default_rel_floor(double h) { return 0.5 * h; }

// B(rel, cos theta) = kernel_scale * b(cos theta) * |rel|^gamma. For gamma < 0
// the speed is replaced by max(|rel|, rel_floor).
inline double kernel_eval(Vec3 const& rel, double cos_theta, InteractionModel const& model)
{
    if (!is_finite(rel) || !std::isfinite(cos_theta)) throw NumericalError("kernel_eval: non-finite input");
    detail::require(cos_theta >= -1.0 - 1e-12 && cos_theta <= 1.0 + 1e-12, "kernel_eval: cos_theta outside [-1,1]");
    double const g = norm(rel);
    double speed_factor = 1.0;
    if (model.gamma != 0.0) {
        if (model.gamma < 0.0) {
            double const r = std::max(g, model.rel_floor);
            if (r == 0.0) throw NumericalError("kernel_eval: zero relative speed with gamma < 0 and no floor configured");
            speed_factor = std::pow(r, model.gamma);
        } else {
            speed_factor = std::pow(g, model.gamma);
        }
    }
    return model.kernel_scale * model.angular(cos_theta) * speed_factor;
}

struct CollisionPair {
    Vec3 xi;
    Vec3 xi_star;
    Vec3 sigma;
};

// Post-collision velocities (xi', xi'_*) in the sigma parametrization.
inline std::pair<Vec3, Vec3> post_collision(CollisionPair const& p)
{
    detail::require(std::abs(norm(p.sigma) - 1.0) <= 1e-12, "post_collision: sigma must be a unit vector");
    Vec3 const center = 0.5 * (p.xi + p.xi_star);
    double const half = 0.5 * norm(p.xi - p.xi_star);
    return {center + half * p.sigma, center - half * p.sigma};
}

} // namespace kinshock
