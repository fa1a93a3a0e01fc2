#pragma once

#include <set>
#include <string>

#include "json.hpp"
#include "mamppi/core/types.hpp"

namespace mamppi {

/// Rejects unknown keys so config typos fail loudly.
inline void check_keys(const nlohmann::json& obj, const std::set<std::string>& allowed,
                       const std::string& context) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key())) {
            throw std::invalid_argument("unknown key '" + it.key() + "' in " + context);
        }
    }
}

inline nlohmann::json vec_to_json(const Vec& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (int i = 0; i < v.size(); ++i) {
        arr.push_back(v[i]);
    }
    return arr;
}

inline Vec vec_from_json(const nlohmann::json& arr) {
    Vec v(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) {
        v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
    }
    return v;
}

}  // namespace mamppi
