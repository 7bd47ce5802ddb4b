#pragma once
#include <string>

#include "mvop/basis.hpp"
#include "mvop/lancaster.hpp"
#include "mvop/markov.hpp"

namespace mvop {

// {"p":[...], "u":[[...],...], "a":[...], "scaled_last":bool}
std::string basis_to_json(const Basis& b);
Basis basis_from_json(const std::string& text);

// {"domain":"simplex"|"box", "atoms":[{"xi":[...],"w":...},...]}
std::string measure_to_json(const MixingMeasure& m);
MixingMeasure measure_from_json(const std::string& text);

std::string read_text_file(const std::string& path);

}  // namespace mvop
