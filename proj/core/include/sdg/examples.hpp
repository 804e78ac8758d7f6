#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sdg/controls.hpp"
#include "sdg/model.hpp"

namespace sdg {

// Named coefficient sets. Every game is scalar (k = d = 1) with scalar
// controls unless noted; parameters come from a JSON object:
//   gamma, kappa, p      structural constants
//   bound                makes both control spaces closed balls
//   sigma, rate          diffusion level and linear discount in f = -rate y
//   terminal             "x" | "x2" | "const"; terminal_value for "const"
//   n_levels             dyadic level for the scalar_phi neutralizers
//
//   zero                 b = sigma = f = g = 0
//   frozen               b = sigma = f = 0, g = x
//   mirror               b = u - v, sigma = f = 0, g = x; psi(u) = u
//   additive             b = u + v, sigma, f = -rate y, g = x; psi(u) = -u
//   additive_diffusion   additive with sigma = 1, rate = 0.5
//   cancellation         additive with sigma = 0
//   heat                 b = 0, sigma, f = -rate y, g = x^2
//   scalar_phi_sum       b = sigma = f = phi = u + v, g = x
//   scalar_phi_sin       b = sigma = f = phi = v - sin(u), g = x
//   compact_demo         bounded controls, H jointly continuous in (t,x,u,v)
CoefficientSet make_game(const std::string& key, const nlohmann::json& params = nlohmann::json::object());
std::vector<std::string> game_keys();

/// Feedback controls from a JSON list of declarations:
///   {"kind": "constant", "values": [-1, 0, 1]}
///   {"kind": "linear", "gain": g}           u = clip(g x)
ControlClass make_controls(const ControlSpace& space, const nlohmann::json& decls);

/// Strategies. `leader_is_two` selects the w1 setting (player II answers
/// u with v, neutralizer psi) over the w2 setting (player I answers v with
/// u, neutralizer psi_tilde).
///   {"kind": "neutralizer"} | {"kind": "mirror"} | {"kind": "anti_mirror"}
///   {"kind": "constant", "values": [...]}
StrategyClass make_strategies(const CoefficientSet& cs, bool leader_is_two,
                              const nlohmann::json& decls);

FeedbackControl constant_control(const ControlSpace& space, ConstVec value);
FeedbackStrategy constant_strategy(const ControlSpace& space, ConstVec value);
/// out = +/- opponent, growth constant 1.
FeedbackStrategy mirror_strategy(const ControlSpace& space, double sign);

}  // namespace sdg
