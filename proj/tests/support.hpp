#pragma once

// Shared fixtures for the test binaries. Values under `frozen` come from
// tests/oracles/freeze_values.py (mpmath/scipy, independent of this library).

#include <random>
#include <string>
#include <vector>

#include "advot/bayes_dynamic.hpp"
#include "advot/model.hpp"

namespace advot::test {

inline BipartiteNetwork reference_network() {
  return fully_connected({"s1", "s2"}, {"q1", "q2", "q3"}, {4.0, 3.0});
}

// M = [[1, 3, 5], [2, 5, 1]] in canonical edge order.
inline PerceptionWeights reference_weights() { return {{1, 3, 5, 2, 5, 1}}; }

inline GameSpec reference_game() {
  return {reference_network(),
          reference_weights(),
          {{6, 4, 4}, {8, 10, 10}},
          {{1, 2, 3, 1, 2, 3}, 0.5, 0.5},
          BeliefState::uniform(3),
          {}};
}

inline std::string scenario_path(const std::string& name) {
  return std::string(ADVOT_SOURCE_DIR) + "/scenarios/" + name;
}

// Random 2x2 game with parameters in the reference ranges.
inline GameSpec random_game_2x2(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> weight(0.0, 5.0);
  std::uniform_real_distribution<double> cap(0.5, 5.0);
  std::uniform_real_distribution<double> bound(1.0, 10.0);
  std::uniform_real_distribution<double> coeff(0.5, 3.0);
  std::uniform_real_distribution<double> prob(0.1, 0.9);
  GameSpec g{fully_connected({"a", "b"}, {"x", "y"}, {cap(rng), cap(rng)}),
             {{weight(rng), weight(rng), weight(rng), weight(rng)}},
             {},
             {{coeff(rng), coeff(rng), coeff(rng), coeff(rng)}, 0.5, 0.5},
             BeliefState::uniform(2),
             {}};
  for (int q = 0; q < 2; ++q) {
    const double lo = bound(rng);
    const double hi = lo + bound(rng);
    g.bounds.minor_cap.push_back(lo);
    g.bounds.major_cap.push_back(hi);
  }
  const double p0 = prob(rng);
  const double p1 = prob(rng);
  g.belief = BeliefState({{1.0 - p0, p0}, {1.0 - p1, p1}});
  return g;
}

namespace frozen {

inline const std::vector<double> primal_row_2_over_3 = {0.26359713811572677, 0.51341711903259203,
                                                        1.0};
inline constexpr double binding_price_1x1 = 1.3025850929940457;
inline constexpr double adversary_single_edge = 0.62996052494743658;

inline const std::vector<double> ot_plan = {0.51341711903259203, 1.0,
                                            1.9477340410546759,  0.67646593124648641,
                                            1.8388250484789499,  0.48470902027456372};
inline const std::vector<double> ot_prices = {0.0, 0.17261957886509795};
inline constexpr double ot_true_utility = 19.901312216857098;

inline const std::vector<double> eq_plan = {0.5409747536648642,  1.1046631020711594,
                                            2.3543621442639764,  0.64214772304644407,
                                            1.8300064666462727,  0.52784581030728323};
inline const std::vector<double> eq_prices = {0.69059261937603858, 1.1762553282133932};
inline const std::vector<double> eq_xi_minor = {0.7499771884334141, 0.87544105123506967,
                                                1.1145541006409905};
inline const std::vector<double> eq_xi_major = {0.47245602332411611, 0.55149330419658022,
                                                0.70212508632211647};
inline constexpr double eq_expected_utility = 27.291136462144334;
inline constexpr double eq_true_utility = 19.755631107818484;
inline constexpr double bounds_true_utility = 19.633180625643905;
// Adversary-free plan, xi = (n1_1, n2_2, n1_3), types (1, 2, 1).
inline constexpr double adversary_cost_sample = 103.18554220567288;

// Dynamic run, T = 5, tau = 0.5, xi0 at the floor: P(major) used in each stage.
inline const std::vector<std::vector<double>> dyn_mu_major = {
    {0.5, 0.5, 0.5},
    {0.43756366588631239, 0.43325988683759171, 0.42678807437002656},
    {0.37704459789176263, 0.36885635615083629, 0.35664957387967015},
    {0.32013158016349043, 0.30880984224905653, 0.29216262846476166},
    {0.26811195812047381, 0.25459523983924015, 0.23507526640699586},
};
inline const std::vector<double> dyn_final_mu_major = {0.22178771983567488, 0.2070474352306922,
                                                       0.18620812979270522};
// Raw actions are the same in every stage.
inline const std::vector<double> dyn_xi_minor = {1.2499771884334141, 1.3754410512350697,
                                                 1.6145541006409905};
inline const std::vector<double> dyn_xi_major = {0.97245602332411611, 1.0514933041965802,
                                                 1.2021250863221165};

inline const std::vector<double> lp_plan = {0.0, 0.0, 4.0, 0.0, 3.0, 0.0};

}  // namespace frozen

}  // namespace advot::test
