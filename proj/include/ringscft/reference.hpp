#pragma once

#include <array>
#include <cmath>
#include <cctype>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ringscft {

inline constexpr std::array<std::string_view, 10> kElementSymbols = {"H", "He", "Li", "Be", "B",
                                                                     "C", "N",  "O",  "F",  "Ne"};

/// Z for a symbol (case-insensitive) or a decimal number in 1..10.
inline int resolve_element(const std::string& name) {
  if (!name.empty() && std::isdigit(static_cast<unsigned char>(name[0]))) {
    std::size_t used = 0;
    int z = 0;
    try {
      z = std::stoi(name, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == name.size() && z >= 1 && z <= 10) return z;
    throw std::invalid_argument("unknown element '" + name + "' (supported: H..Ne, Z = 1..10)");
  }
  for (std::size_t k = 0; k < kElementSymbols.size(); ++k) {
    const auto& s = kElementSymbols[k];
    if (s.size() != name.size()) continue;
    bool same = true;
    for (std::size_t c = 0; c < s.size(); ++c)
      if (std::tolower(static_cast<unsigned char>(s[c])) != std::tolower(static_cast<unsigned char>(name[c])))
        same = false;
    if (same) return static_cast<int>(k) + 1;
  }
  throw std::invalid_argument("unknown element '" + name + "' (supported: H..Ne, Z = 1..10)");
}

inline std::string element_symbol(int Z) {
  if (Z < 1 || Z > 10) throw std::out_of_range("element_symbol: Z outside 1..10");
  return std::string(kElementSymbols[static_cast<std::size_t>(Z - 1)]);
}

/// Published binding energies (Hartree) and density-constraint ratios for
/// H..Ne. Mirrored in data/reference.csv.
struct ReferenceRow {
  int Z;
  double hf;              // Hartree-Fock binding energy
  double scft_angular;    // SCFT, full angular basis
  double scft_spherical;  // SCFT, l = 0 basis only
  double ratio1;          // L3-norm bound ratio
  double ratio2;          // von Weizsacker bound ratio
};

inline constexpr std::array<ReferenceRow, 10> kReference = {{
    {1, 0.5000000000, 0.4999999, 0.4999999, 0.85127, 0.99985},
    {2, 2.861679996, 2.861679, 2.861679, 0.87446, 0.99983},
    {3, 7.432726931, 7.46842, 7.46842, 0.85268, 0.95681},
    {4, 14.57302317, 14.70219, 14.70219, 0.83296, 0.92839},
    {5, 24.52906073, 24.66954, 24.66954, 0.82156, 0.91523},
    {6, 37.68861896, 37.655254, 37.567740, 0.80450, 0.90587},
    {7, 54.40093421, 53.65814, 53.40706, 0.79150, 0.89451},
    {8, 74.80939847, 72.8257, 72.3335, 0.78058, 0.88589},
    {9, 99.40934939, 95.2256, 94.3264, 0.77055, 0.87868},
    {10, 128.5470981, 120.9975, 119.5084, 0.76157, 0.87234},
}};

inline const ReferenceRow& reference_for(int Z) {
  for (const auto& r : kReference)
    if (r.Z == Z) return r;
  throw std::out_of_range("no reference data for Z=" + std::to_string(Z));
}

/// Published per-pair energy decompositions (Hartree), pairs ordered most
/// bound first. Columns: U_en, U_ee, U_sic, U_P, U, -S_c/beta, -S_t/beta, F.
struct DecompositionRow {
  std::array<double, 8> v;
};

inline constexpr std::array<DecompositionRow, 1> kCarbonSphericalTotal = {
    {{{-85.74463, 16.29579, -4.61070, 1.07545, -72.98408, 35.44489, -0.02854, -37.56774}}}};
inline constexpr std::array<DecompositionRow, 1> kCarbonAngularTotal = {
    {{{-86.58204, 17.00649, -4.79562, 0.93938, -73.43179, 35.80124, -0.02473, -37.65527}}}};
inline constexpr std::array<double, 2> kCarbonAngularPairF23 = {-4.20999, -4.20998};
inline constexpr double kFluorineAngularTotalU = -183.94568;
inline constexpr double kFluorineAngularPair1MinusScOverBeta = 80.79204;

struct Deviation {
  double scft = 0.0;
  double hf = 0.0;
  double pct_dev_hf = 0.0;     // |E - E_hf| / E * 100
  double published = 0.0;      // published SCFT value for the same basis kind
  double pct_dev_published = 0.0;
};

/// Percent deviations of a binding energy from HF and from the published
/// SCFT value of the same basis kind. The HF deviation is taken relative to
/// the SCFT value, matching the reference data.
inline Deviation compare_reference(double binding, int Z, bool spherical) {
  const ReferenceRow& r = reference_for(Z);
  Deviation d;
  d.scft = binding;
  d.hf = r.hf;
  d.pct_dev_hf = std::abs(binding - r.hf) / binding * 100.0;
  d.published = spherical ? r.scft_spherical : r.scft_angular;
  d.pct_dev_published = std::abs(binding - d.published) / d.published * 100.0;
  return d;
}

}  // namespace ringscft
