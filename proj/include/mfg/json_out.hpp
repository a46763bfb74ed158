#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace mfg::out {

using Json = nlohmann::ordered_json;

/// %.17g, with ".0" appended to integral values; non-finite values become null.
std::string format_double(double v);

/// Deterministic serialization: insertion-ordered keys, doubles with 17
/// significant digits, two-space indent, trailing newline.
std::string dump(const Json& j);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<Json>> rows;
};
std::string to_csv(const Table& t);

/// Write through a temporary in the same directory, then rename.
void write_atomic(const std::string& path, const std::string& content);

}  // namespace mfg::out
