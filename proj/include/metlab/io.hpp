#pragma once

#include "metlab/cocycle.hpp"
#include "metlab/normed.hpp"

#include <json.hpp>

namespace metlab::io {

using json = nlohmann::json;

// Extended reals: −∞ as the string "-inf", NaN as null.
json ext(double v);
double ext_from(const json& j);

json matrix_to_json(const Mat& m);  // row-major nested arrays
Mat matrix_from_json(const json& j);
json vector_to_json(const Vec& v);
Vec vector_from_json(const json& j);

json to_json(const NormSpec& n);
NormSpec norm_from_json(const json& j);
json to_json(const BaseSystem& b);
BaseSystem base_from_json(const json& j);
json to_json(const Generator& g);
Generator generator_from_json(const json& j);

// {"base":{...},"generator":{...},"norm":{...},"seed":N}
CocycleSystem cocycle_from_json(const json& j);

}  // namespace metlab::io
