#pragma once

#include <array>

/// Published reference results for the five singular benchmark datasets:
/// robustness indices, element counts and final errors of the adaptive runs,
/// used by the regression harness and the acceptance suite.
namespace amstokes::golden {

struct AdaptiveRow {
  double ind_err;
  double eff_index;
  int elements;
  double eta;
  double energy;
  double interp;
};

// RT0 x P1, theta = 1, stopping rel-err < 0.11
inline constexpr std::array<AdaptiveRow, 5> kRT1 = {{
    {0.9855, 1.1737, 4416, 0.4228, 0.4962, 0.4986},
    {0.9558, 1.2099, 4548, 0.1883, 0.2279, 0.2384},
    {0.9437, 1.2123, 3318, 0.1383, 0.1677, 0.1777},
    {0.9242, 1.2082, 2064, 0.1891, 0.2285, 0.2472},
    {0.9239, 1.1909, 1296, 0.6250, 0.7443, 0.7750},
}};

// RT0 x P1, theta = h^2, stopping rel-err < 0.11
inline constexpr std::array<AdaptiveRow, 5> kRTh = {{
    {0.9798, 1.2973, 3896, 0.3596, 0.4665, 0.4761},
    {0.9550, 1.2717, 4114, 0.1759, 0.2237, 0.2343},
    {0.9454, 1.2512, 3002, 0.1339, 0.1675, 0.1772},
    {0.9308, 1.2413, 2084, 0.1740, 0.2160, 0.2320},
    {0.9239, 1.2346, 1256, 0.5939, 0.7333, 0.7937},
}};

// BDM1 x P2, theta = h^2, stopping rel-err < 0.02
inline constexpr std::array<AdaptiveRow, 5> kBDMh = {{
    {0.9820, 1.3586, 4140, 0.0445, 0.0605, 0.0616},
    {0.9761, 1.3293, 2528, 0.0287, 0.0382, 0.0391},
    {0.9762, 1.3038, 1564, 0.0239, 0.0311, 0.0319},
    {0.9693, 1.2751, 1048, 0.0321, 0.0410, 0.0423},
    {0.9458, 1.2417, 768, 0.0986, 0.1225, 0.1295},
}};

}  // namespace amstokes::golden
