#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ncbal/models.hpp"

namespace ncbal {

/// Safety factor applied to the per-pair wave speed to obtain L_g.
inline constexpr double kLipschitzSafety = 1.05;

/// One interface evaluation. `k_view` is g(w_K,w_L;n) and `l_view` is g(w_L,w_K;−n);
/// they differ on components that carry a non-conservative source.
struct FaceFlux {
    State k_view;
    State l_view;
    double entropy = 0.0;  ///< G(w_K,w_L;n)
};

class NumericalFlux {
public:
    virtual ~NumericalFlux() = default;

    virtual std::string_view name() const = 0;
    const Model& model() const noexcept { return *model_; }
    const ModelPtr& model_ptr() const noexcept { return model_; }

    virtual FaceFlux evaluate(const State& uk, double ak, const State& ul, double al, const Normal& n) const = 0;

    /// Pair wave-speed bound λ; L_g = kLipschitzSafety·λ.
    virtual double wave_speed(const State& uk, double ak, const State& ul, double al, const Normal& n) const;
    double lipschitz(const State& uk, double ak, const State& ul, double al, const Normal& n) const {
        return kLipschitzSafety * wave_speed(uk, ak, ul, al, n);
    }

protected:
    explicit NumericalFlux(ModelPtr model) : model_(std::move(model)) {}

    ModelPtr model_;
};

using FluxPtr = std::shared_ptr<const NumericalFlux>;

/// Local Lax–Friedrichs flux with the central entropy flux; any model.
FluxPtr make_rusanov(ModelPtr model);
/// Hydrostatic reconstruction over Rusanov; shallow water only.
FluxPtr make_hydrostatic(ModelPtr model);
/// Acoustic solver in (U, p−α); Lagrangian model only.
FluxPtr make_acoustic(ModelPtr model);
/// "rusanov", "hydrostatic" or "acoustic".
FluxPtr make_flux(std::string_view name, ModelPtr model);

/// 𝒰(w_K,w_L;n,ν) = u_K − ν(g(w_K,w_L;n) − f(w_K)·n)
State intermediate_state(const NumericalFlux& flux, const State& uk, double ak, const State& ul, double al,
                         const Normal& n, double nu);

/// Γ = F(w_K)·n + ∂_uη(w_K)·(g(w_K,w_L;n) − f(w_K)·n)
double tadmor_gamma(const NumericalFlux& flux, const State& uk, double ak, const State& ul, double al,
                    const Normal& n);

/// Smallest of the model's positivity quantities (h; ρ and e; τ and e).
double positivity_margin(const Model& model, const State& u, double alpha);

// Contract certification.

struct SampleSpec {
    PrimitiveBox box;
    std::size_t samples = 10000;
    std::uint64_t seed = 1;
    /// α range for stepped and stationary pairs; defaults to box.alpha widened to [lo, lo+0.5] when degenerate.
    std::optional<Interval> step_alpha;
    /// Subset of {F1,...,F5}; empty means all.
    std::vector<std::string> contracts;
};

struct ContractRow {
    std::string name;
    std::string status;  ///< pass | fail | info
    std::size_t samples = 0;
    std::size_t violations = 0;
    double worst = 0.0;      ///< largest violation (or smallest margin for F3)
    double tolerance = 0.0;
    long witness = -1;       ///< sample index of the worst violation
    std::string witness_text;
};

struct ContractReport {
    std::string flux;
    std::string model;
    std::string box;
    std::size_t samples = 0;
    std::uint64_t seed = 0;
    double eta_low = 0.0;
    std::vector<ContractRow> rows;

    const ContractRow* find(std::string_view name) const;
    /// True when no requested contract failed.
    bool passed() const;
    std::string to_csv() const;
};

/// Samples pairs from the box and checks (F1)–(F5), the entropy gap inequality and the conservation of G.
///
/// F1–F4 and the gap use pairs with a common α drawn from box.alpha; F5 uses stationary pairs of
/// the model's family over stepped α. Informational rows repeat F4 and the gap on stepped pairs.
ContractReport certify_contracts(const NumericalFlux& flux, const SampleSpec& spec);

}  // namespace ncbal
