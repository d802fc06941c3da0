#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "latscope/lattice.hpp"
#include "latscope/region.hpp"
#include "latscope/spectral.hpp"
#include "latscope/wavelet.hpp"

namespace latscope {

using Json = nlohmann::json;

// Matrices serialize as row-major nested arrays; readers also accept the
// object form {"n":, "entries":} where noted. Scalars must be finite: the
// text form round-trips doubles exactly, which infinities would break.

Json mat_to_json(const Mat& M);
Mat mat_from_json(const Json& j);

Json dilation_to_json(const Dilation& d);
Dilation dilation_from_json(const Json& j);

Json lattice_to_json(const Lattice& L);
Lattice lattice_from_json(const Json& j);

Json region_to_json(const Region& R);
Region region_from_json(const Json& j);

Json freq_to_json(const FreqFunction& f);
FreqFunction freq_from_json(const Json& j);

// Named ready-made configurations. Lattices: "Zn", "hex", "sqrt2-norm".
// Dilation/lattice pairs: "shear-golden", "rotation-jordan". Frequency
// generators with their dilation and lattice: "shannon", "dyadic-annulus".
// n applies where the object family is dimension-parametric.
struct Preset {
  std::string name;
  std::optional<Dilation> dilation;
  std::optional<Lattice> lattice;
  std::optional<FreqFunction> psi;
};

Preset preset(const std::string& name, int n = 2);
const std::vector<std::string>& preset_names();

std::uint64_t stable_hash(const std::string& s);

// Full content goes to <path>.tmp first, then a rename; readers never see
// a partial file.
void write_text_atomic(const std::string& path, const std::string& text);
void write_report_atomic(const std::string& path, const Json& report);

}  // namespace latscope
