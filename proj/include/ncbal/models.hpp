#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ncbal/types.hpp"

namespace ncbal {

enum class ModelKind { ShallowWater1D, ShallowWater2D, PorousEuler1D, Lagrangian1D };

/// Smallest admissible water height.
inline constexpr double kMinDepth = 1e-8;

struct ModelParams {
    double gravity = 9.81;
    double gamma = 1.4;  ///< ideal-gas ratio of specific heats
    double cv = 1.0;     ///< specific heat at constant volume
};

/// A balance law u_t + div f(u,α) + Σ s_i(u,α) ∂_i α = 0 with a stationary field α,
/// together with its entropy pair. Every evaluation is pure and thread-safe.
///
/// Members that take a State throw DomainError when the state is not admissible.
class Model {
public:
    virtual ~Model() = default;

    virtual ModelKind kind() const = 0;
    virtual std::string_view name() const = 0;
    virtual int components() const = 0;
    virtual int dimension() const = 0;
    virtual const ModelParams& params() const = 0;

    /// Throws DomainError naming the violated bound.
    virtual void check_admissible(const State& u, double alpha) const = 0;
    bool admissible(const State& u, double alpha) const noexcept;

    /// f(u,α)·n
    virtual State flux(const State& u, double alpha, const Normal& n) const = 0;
    /// Column i holds s_i(u,α); the result is N×d.
    virtual Matrix source(const State& u, double alpha) const = 0;

    virtual double entropy(const State& u, double alpha) const = 0;
    /// F(u,α)·n
    virtual double entropy_flux(const State& u, double alpha, const Normal& n) const = 0;
    virtual State entropy_gradient(const State& u, double alpha) const = 0;
    virtual Matrix entropy_hessian(const State& u, double alpha) const = 0;

    /// h(u,v,α) = η(u,α) − η(v,α) − ∂_uη(v,α)·(u−v), evaluated in a cancellation-free form.
    virtual double relative_entropy(const State& u, const State& v, double alpha) const = 0;

    /// Largest characteristic speed in direction n (mass-coordinate speed for Lagrangian).
    virtual double max_wave_speed(const State& u, double alpha, const Normal& n) const = 0;

    virtual std::vector<std::string> primitive_names() const = 0;
    virtual State from_primitive(const State& prim, double alpha) const = 0;
    virtual State to_primitive(const State& u, double alpha) const = 0;

    /// Mirror ghost: scalars copied, velocity reflected across the face.
    virtual State reflect(const State& u, const Normal& n) const = 0;

    /// true for the components k with s^(k) ≡ 0.
    virtual std::vector<bool> conserved_components() const = 0;

    /// Interval of α values for which states are admissible.
    virtual Interval alpha_domain() const;
};

using ModelPtr = std::shared_ptr<const Model>;

ModelPtr make_model(ModelKind kind, const ModelParams& params = {});
ModelPtr make_model(std::string_view name, const ModelParams& params = {});
std::string_view model_name(ModelKind kind);

/// The definition-based relative entropy; differs from Model::relative_entropy only by rounding.
double relative_entropy_definition(const Model& model, const State& u, const State& v, double alpha);

/// Axis-aligned box in the model's primitive variables, plus an α interval.
struct PrimitiveBox {
    std::vector<Interval> ranges;
    Interval alpha{0.0, 0.0};

    bool contains(const Model& model, const State& u, double alpha) const;
};

/// Parses "h=0.5:2,U=-1:1[,alpha=0:0.5]" against the model's primitive names.
PrimitiveBox parse_box(const Model& model, std::string_view spec);
std::string format_box(const Model& model, const PrimitiveBox& box);

/// Certified spectral bounds of the entropy Hessian over a box.
struct HessianBounds {
    double low = 0.0;
    double high = 0.0;
};

inline constexpr double kHessianLowSafety = 0.9;
inline constexpr double kHessianHighSafety = 1.1;

/// Samples exact Hessian eigenvalues on a tensor grid (≥ 10 points per axis) and applies
/// the 0.9/1.1 safety factors. Throws DomainError if the box touches the boundary of Ω.
HessianBounds hessian_bounds(const Model& model, const PrimitiveBox& box, int points_per_axis = 10);

// Stationary families.

struct LakeAtRest {
    double z0 = 1.0;
};
struct RestingGas {
    double temperature = 1.0;
    double pressure = 1.0;
};
struct HydrostaticColumn {
    double velocity = 0.0;
    double reduced_pressure = 1.0;  ///< p − α
    double temperature = 1.0;
};
using FamilyData = std::variant<LakeAtRest, RestingGas, HydrostaticColumn>;

/// Cell states v_K with ∂_uη(v_K,α_K) = H₀ for every K.
struct StationaryField {
    State h0;
    std::vector<State> states;
};

/// Throws DomainError when the family is incompatible with the model or yields
/// inadmissible states (dry cells, nonpositive pressure).
StationaryField stationary_state(const Model& model, const FamilyData& family, std::span<const double> alpha);

/// Family data evaluated at a single α (used by samplers).
State stationary_point(const Model& model, const FamilyData& family, double alpha);

/// Z₀ = (V₀ + Σ|K|α_K)/Σ|K|. Throws DomainError listing the cells left dry.
double lake_level_from_volume(std::span<const double> alpha, std::span<const double> cell_measures, double volume);

/// max_K |∂_uη(v_K,α_K) − H₀|
double stationarity_defect(const Model& model, const StationaryField& field, std::span<const double> alpha);

}  // namespace ncbal
