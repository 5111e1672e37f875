#include <cmath>
#include <sstream>

#include "model_factories.hpp"
#include "ncbal/errors.hpp"

namespace ncbal::detail {
namespace {

// Saint-Venant system with bathymetry α in d = 1 or 2 space dimensions.
// Conserved variables u = (h, hU_1, ..., hU_d).
class ShallowWater final : public Model {
public:
    ShallowWater(int dimension, const ModelParams& params) : dim_(dimension), params_(params) {
        if (!(params.gravity > 0.0)) throw DomainError("shallow water: gravity must be positive");
    }

    ModelKind kind() const override {
        return dim_ == 1 ? ModelKind::ShallowWater1D : ModelKind::ShallowWater2D;
    }
    std::string_view name() const override { return dim_ == 1 ? "sw1d" : "sw2d"; }
    int components() const override { return dim_ + 1; }
    int dimension() const override { return dim_; }
    const ModelParams& params() const override { return params_; }

    void check_admissible(const State& u, double alpha) const override {
        if (u.size() != components()) throw DomainError("shallow water: wrong component count");
        if (!u.allFinite() || !std::isfinite(alpha)) throw DomainError("shallow water: non-finite state");
        if (!(u[0] >= kMinDepth)) {
            std::ostringstream msg;
            msg << "shallow water: height h = " << u[0] << " below h_min = " << kMinDepth;
            throw DomainError(msg.str());
        }
    }

    State flux(const State& u, double alpha, const Normal& n) const override {
        check_admissible(u, alpha);
        const double h = u[0];
        const double un = normal_velocity(u, n);
        const double pressure = 0.5 * params_.gravity * h * h;
        State f(components());
        f[0] = h * un;
        for (int i = 0; i < dim_; ++i) f[1 + i] = u[1 + i] * un + pressure * n[i];
        return f;
    }

    Matrix source(const State& u, double alpha) const override {
        check_admissible(u, alpha);
        Matrix s = Matrix::Zero(components(), dim_);
        for (int i = 0; i < dim_; ++i) s(1 + i, i) = params_.gravity * u[0];
        return s;
    }

    double entropy(const State& u, double alpha) const override {
        check_admissible(u, alpha);
        const double h = u[0];
        return 0.5 * h * speed_squared(u) + params_.gravity * h * (0.5 * h + alpha);
    }

    double entropy_flux(const State& u, double alpha, const Normal& n) const override {
        const double eta = entropy(u, alpha);
        const double h = u[0];
        return normal_velocity(u, n) * (eta + 0.5 * params_.gravity * h * h);
    }

    State entropy_gradient(const State& u, double alpha) const override {
        check_admissible(u, alpha);
        State v(components());
        v[0] = -0.5 * speed_squared(u) + params_.gravity * (u[0] + alpha);
        for (int i = 0; i < dim_; ++i) v[1 + i] = u[1 + i] / u[0];
        return v;
    }

    Matrix entropy_hessian(const State& u, double alpha) const override {
        check_admissible(u, alpha);
        const double h = u[0];
        Matrix hess = Matrix::Zero(components(), components());
        hess(0, 0) = speed_squared(u) / h + params_.gravity;
        for (int i = 0; i < dim_; ++i) {
            const double vel = u[1 + i] / h;
            hess(0, 1 + i) = hess(1 + i, 0) = -vel / h;
            hess(1 + i, 1 + i) = 1.0 / h;
        }
        return hess;
    }

    double relative_entropy(const State& u, const State& v, double alpha) const override {
        check_admissible(u, alpha);
        check_admissible(v, alpha);
        double du2 = 0.0;
        for (int i = 0; i < dim_; ++i) {
            const double du = u[1 + i] / u[0] - v[1 + i] / v[0];
            du2 += du * du;
        }
        const double dh = u[0] - v[0];
        return 0.5 * u[0] * du2 + 0.5 * params_.gravity * dh * dh;
    }

    double max_wave_speed(const State& u, double alpha, const Normal& n) const override {
        check_admissible(u, alpha);
        return std::abs(normal_velocity(u, n)) + std::sqrt(params_.gravity * u[0]);
    }

    std::vector<std::string> primitive_names() const override {
        if (dim_ == 1) return {"h", "U"};
        return {"h", "U", "V"};
    }

    State from_primitive(const State& prim, double alpha) const override {
        State u(components());
        u[0] = prim[0];
        for (int i = 0; i < dim_; ++i) u[1 + i] = prim[0] * prim[1 + i];
        check_admissible(u, alpha);
        return u;
    }

    State to_primitive(const State& u, double alpha) const override {
        check_admissible(u, alpha);
        State prim(components());
        prim[0] = u[0];
        for (int i = 0; i < dim_; ++i) prim[1 + i] = u[1 + i] / u[0];
        return prim;
    }

    State reflect(const State& u, const Normal& n) const override {
        State ghost = u;
        const double qn = momentum_normal(u, n);
        for (int i = 0; i < dim_; ++i) ghost[1 + i] = u[1 + i] - 2.0 * qn * n[i];
        return ghost;
    }

    std::vector<bool> conserved_components() const override {
        std::vector<bool> out(components(), false);
        out[0] = true;
        return out;
    }

private:
    double momentum_normal(const State& u, const Normal& n) const {
        double qn = 0.0;
        for (int i = 0; i < dim_; ++i) qn += u[1 + i] * n[i];
        return qn;
    }
    double normal_velocity(const State& u, const Normal& n) const { return momentum_normal(u, n) / u[0]; }
    double speed_squared(const State& u) const {
        double s = 0.0;
        for (int i = 0; i < dim_; ++i) s += u[1 + i] * u[1 + i];
        return s / (u[0] * u[0]);
    }

    int dim_;
    ModelParams params_;
};

}  // namespace

ModelPtr make_shallow_water(int dimension, const ModelParams& params) {
    return std::make_shared<ShallowWater>(dimension, params);
}

}  // namespace ncbal::detail
