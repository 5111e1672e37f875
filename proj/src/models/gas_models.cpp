#include <cmath>
#include <limits>
#include <sstream>

#include "model_factories.hpp"
#include "ncbal/errors.hpp"

namespace ncbal::detail {
namespace {

// Ideal gas closure: p = (γ−1)ρe, T = e/c_v, s = c_v ln(e τ^(γ−1)).
struct IdealGas {
    double gamma;
    double cv;

    double pressure(double tau, double e) const { return (gamma - 1.0) * e / tau; }
    double temperature(double e) const { return e / cv; }
    double specific_entropy(double tau, double e) const {
        return cv * (std::log(e) + (gamma - 1.0) * std::log(tau));
    }
    /// c_v[φ(e_u/e_v) + (γ−1)φ(τ_u/τ_v) + |ΔU|²/(2e_v)] per unit mass.
    double relative_entropy_per_mass(double tau_u, double e_u, double vel_u, double tau_v, double e_v,
                                     double vel_v) const {
        const double de = (e_u - e_v) / e_v;
        const double dtau = (tau_u - tau_v) / tau_v;
        const double dvel = vel_u - vel_v;
        return cv * (log_gap(de) + (gamma - 1.0) * log_gap(dtau) + 0.5 * dvel * dvel / e_v);
    }
};

void check_gas_params(const ModelParams& p, const char* who) {
    if (!(p.gamma > 1.0) || !(p.cv > 0.0)) {
        throw DomainError(std::string(who) + ": require gamma > 1 and cv > 0");
    }
}

// Compressible Euler equations in a porous medium of porosity α > 0, one space dimension.
// Conserved variables u = (αρ, αρU, αρE).
class PorousEuler final : public Model {
public:
    explicit PorousEuler(const ModelParams& params) : params_(params), gas_{params.gamma, params.cv} {
        check_gas_params(params, "porous euler");
    }

    ModelKind kind() const override { return ModelKind::PorousEuler1D; }
    std::string_view name() const override { return "porous_euler"; }
    int components() const override { return 3; }
    int dimension() const override { return 1; }
    const ModelParams& params() const override { return params_; }
    Interval alpha_domain() const override { return {std::numeric_limits<double>::min(), HUGE_VAL}; }

    void check_admissible(const State& u, double alpha) const override {
        if (u.size() != 3) throw DomainError("porous euler: wrong component count");
        if (!u.allFinite() || !std::isfinite(alpha)) throw DomainError("porous euler: non-finite state");
        if (!(alpha > 0.0)) throw DomainError("porous euler: porosity alpha must be positive");
        if (!(u[0] > 0.0)) throw DomainError("porous euler: density must be positive");
        const Thermo t = thermo(u, alpha);
        if (!(t.e > 0.0)) {
            std::ostringstream msg;
            msg << "porous euler: internal energy e = " << t.e << " must be positive";
            throw DomainError(msg.str());
        }
    }

    State flux(const State& u, double alpha, const Normal& n) const override {
        check_admissible(u, alpha);
        const Thermo t = thermo(u, alpha);
        State f(3);
        f[0] = u[1];
        f[1] = u[1] * t.vel + alpha * t.p;
        f[2] = t.vel * (u[2] + alpha * t.p);
        return f * n.x();
    }

    Matrix source(const State& u, double alpha) const override {
        check_admissible(u, alpha);
        Matrix s = Matrix::Zero(3, 1);
        s(1, 0) = -thermo(u, alpha).p;
        return s;
    }

    double entropy(const State& u, double alpha) const override {
        check_admissible(u, alpha);
        const Thermo t = thermo(u, alpha);
        return -u[0] * gas_.specific_entropy(1.0 / t.rho, t.e);
    }

    double entropy_flux(const State& u, double alpha, const Normal& n) const override {
        const double eta = entropy(u, alpha);
        return thermo(u, alpha).vel * eta * n.x();
    }

    State entropy_gradient(const State& u, double alpha) const override {
        check_admissible(u, alpha);
        const Thermo t = thermo(u, alpha);
        const double temp = gas_.temperature(t.e);
        const double s = gas_.specific_entropy(1.0 / t.rho, t.e);
        State v(3);
        v[0] = (t.e + t.p / t.rho - temp * s - 0.5 * t.vel * t.vel) / temp;
        v[1] = t.vel / temp;
        v[2] = -1.0 / temp;
        return v;
    }

    // η(u,α) = α S(u/α) with S(ρ,m,E) = −c_v ρ ln(ρe) + c_v γ ρ ln ρ.
    Matrix entropy_hessian(const State& u, double alpha) const override {
        check_admissible(u, alpha);
        const Thermo t = thermo(u, alpha);
        const double cv = gas_.cv;
        const double rho = t.rho;
        const double m = rho * t.vel;
        const double eps = rho * t.e;
        const double eps_rho = 0.5 * t.vel * t.vel;
        const double eps_rhorho = -t.vel * t.vel / rho;
        const double eps2 = eps * eps;
        Matrix hess(3, 3);
        hess(2, 2) = cv * rho / eps2;
        hess(2, 1) = hess(1, 2) = -cv * m / eps2;
        hess(2, 0) = hess(0, 2) = -cv / eps + cv * rho * eps_rho / eps2;
        hess(1, 1) = cv / eps + cv * m * m / (rho * eps2);
        hess(1, 0) = hess(0, 1) = -cv * m * eps_rho / eps2;
        hess(0, 0) = -2.0 * cv * eps_rho / eps - cv * rho * eps_rhorho / eps + cv * rho * eps_rho * eps_rho / eps2 +
                     cv * gas_.gamma / rho;
        return hess / alpha;
    }

    double relative_entropy(const State& u, const State& v, double alpha) const override {
        check_admissible(u, alpha);
        check_admissible(v, alpha);
        const Thermo tu = thermo(u, alpha);
        const Thermo tv = thermo(v, alpha);
        return u[0] * gas_.relative_entropy_per_mass(1.0 / tu.rho, tu.e, tu.vel, 1.0 / tv.rho, tv.e, tv.vel);
    }

    double max_wave_speed(const State& u, double alpha, const Normal& n) const override {
        check_admissible(u, alpha);
        const Thermo t = thermo(u, alpha);
        return std::abs(t.vel * n.x()) + std::sqrt(gas_.gamma * t.p / t.rho);
    }

    std::vector<std::string> primitive_names() const override { return {"rho", "U", "e"}; }

    State from_primitive(const State& prim, double alpha) const override {
        State u(3);
        u[0] = alpha * prim[0];
        u[1] = alpha * prim[0] * prim[1];
        u[2] = alpha * prim[0] * (prim[2] + 0.5 * prim[1] * prim[1]);
        check_admissible(u, alpha);
        return u;
    }

    State to_primitive(const State& u, double alpha) const override {
        check_admissible(u, alpha);
        const Thermo t = thermo(u, alpha);
        State prim(3);
        prim << t.rho, t.vel, t.e;
        return prim;
    }

    State reflect(const State& u, const Normal& n) const override {
        State ghost = u;
        ghost[1] = u[1] - 2.0 * u[1] * n.x() * n.x();
        return ghost;
    }

    std::vector<bool> conserved_components() const override { return {true, false, true}; }

private:
    struct Thermo {
        double rho, vel, e, p;
    };
    Thermo thermo(const State& u, double alpha) const {
        Thermo t{};
        t.rho = u[0] / alpha;
        t.vel = u[1] / u[0];
        t.e = u[2] / u[0] - 0.5 * t.vel * t.vel;
        t.p = gas_.pressure(1.0 / t.rho, t.e);
        return t;
    }

    ModelParams params_;
    IdealGas gas_;
};

// Gas dynamics with a potential source in Lagrangian mass coordinates, written in the
// conservative variables u = (τ, U, F) with F = E + τα. The system has no source term.
class Lagrangian final : public Model {
public:
    explicit Lagrangian(const ModelParams& params) : params_(params), gas_{params.gamma, params.cv} {
        check_gas_params(params, "lagrangian");
    }

    ModelKind kind() const override { return ModelKind::Lagrangian1D; }
    std::string_view name() const override { return "lagrangian"; }
    int components() const override { return 3; }
    int dimension() const override { return 1; }
    const ModelParams& params() const override { return params_; }

    void check_admissible(const State& u, double alpha) const override {
        if (u.size() != 3) throw DomainError("lagrangian: wrong component count");
        if (!u.allFinite() || !std::isfinite(alpha)) throw DomainError("lagrangian: non-finite state");
        if (!(u[0] > 0.0)) throw DomainError("lagrangian: specific volume tau must be positive");
        const double e = internal_energy(u, alpha);
        if (!(e > 0.0)) {
            std::ostringstream msg;
            msg << "lagrangian: internal energy e = " << e << " must be positive";
            throw DomainError(msg.str());
        }
    }

    State flux(const State& u, double alpha, const Normal& n) const override {
        check_admissible(u, alpha);
        const double reduced = reduced_pressure(u, alpha);
        State f(3);
        f << -u[1], reduced, reduced * u[1];
        return f * n.x();
    }

    Matrix source(const State& u, double alpha) const override {
        check_admissible(u, alpha);
        return Matrix::Zero(3, 1);
    }

    double entropy(const State& u, double alpha) const override {
        check_admissible(u, alpha);
        return -gas_.specific_entropy(u[0], internal_energy(u, alpha));
    }

    // Entropy is transported with the particles: no flux in mass coordinates.
    double entropy_flux(const State& u, double alpha, const Normal&) const override {
        check_admissible(u, alpha);
        return 0.0;
    }

    State entropy_gradient(const State& u, double alpha) const override {
        check_admissible(u, alpha);
        const double inv_temp = gas_.cv / internal_energy(u, alpha);
        State v(3);
        v << -reduced_pressure(u, alpha) * inv_temp, u[1] * inv_temp, -inv_temp;
        return v;
    }

    // c_v/e² a aᵀ + diag(c_v(γ−1)/τ², c_v/e, 0) with a = (−α, −U, 1).
    Matrix entropy_hessian(const State& u, double alpha) const override {
        check_admissible(u, alpha);
        const double e = internal_energy(u, alpha);
        const double cv = gas_.cv;
        Eigen::Vector3d a(-alpha, -u[1], 1.0);
        Matrix hess = (cv / (e * e)) * (a * a.transpose());
        hess(0, 0) += cv * (gas_.gamma - 1.0) / (u[0] * u[0]);
        hess(1, 1) += cv / e;
        return hess;
    }

    double relative_entropy(const State& u, const State& v, double alpha) const override {
        check_admissible(u, alpha);
        check_admissible(v, alpha);
        return gas_.relative_entropy_per_mass(u[0], internal_energy(u, alpha), u[1], v[0],
                                              internal_energy(v, alpha), v[1]);
    }

    // Lagrangian sound speed ρc = sqrt(γ p / τ).
    double max_wave_speed(const State& u, double alpha, const Normal&) const override {
        check_admissible(u, alpha);
        return std::sqrt(gas_.gamma * gas_.pressure(u[0], internal_energy(u, alpha)) / u[0]);
    }

    std::vector<std::string> primitive_names() const override { return {"tau", "U", "e"}; }

    State from_primitive(const State& prim, double alpha) const override {
        State u(3);
        u << prim[0], prim[1], prim[2] + prim[0] * alpha + 0.5 * prim[1] * prim[1];
        check_admissible(u, alpha);
        return u;
    }

    State to_primitive(const State& u, double alpha) const override {
        check_admissible(u, alpha);
        State prim(3);
        prim << u[0], u[1], internal_energy(u, alpha);
        return prim;
    }

    State reflect(const State& u, const Normal& n) const override {
        State ghost = u;
        ghost[1] = u[1] - 2.0 * u[1] * n.x() * n.x();
        return ghost;
    }

    std::vector<bool> conserved_components() const override { return {true, true, true}; }

private:
    double internal_energy(const State& u, double alpha) const { return u[2] - u[0] * alpha - 0.5 * u[1] * u[1]; }
    double reduced_pressure(const State& u, double alpha) const {
        return gas_.pressure(u[0], internal_energy(u, alpha)) - alpha;
    }

    ModelParams params_;
    IdealGas gas_;
};

}  // namespace

ModelPtr make_porous_euler(const ModelParams& params) { return std::make_shared<PorousEuler>(params); }
ModelPtr make_lagrangian(const ModelParams& params) { return std::make_shared<Lagrangian>(params); }

}  // namespace ncbal::detail
