#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace bbmlab {

// FNV-1a; stamps every emitted file with the config it came from.
std::uint64_t fnv1a64(std::string_view s);

// Shortest round-trip decimal form ("%.17g").
std::string format_g17(double v);

// Output directory precedence: explicit flag > BBMLAB_OUTPUT_DIR > ".".
// The directory is created if missing; failures raise io_error.
std::string resolve_output_dir(const std::string& flag_value);

// '#'-prefixed header block: config hash, master seed, then one line per
// column/field description.
std::string comment_header(std::uint64_t config_hash, std::uint64_t seed,
                           const std::vector<std::string>& lines);

// Whole-file write; raises io_error with the path on failure.
void write_text_file(const std::string& path, const std::string& content);

}  // namespace bbmlab
