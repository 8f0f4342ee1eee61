#include "bbmlab/output.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "bbmlab/errors.hpp"

namespace bbmlab {

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string resolve_output_dir(const std::string& flag_value) {
  std::string dir = flag_value;
  if (dir.empty()) {
    if (const char* env = std::getenv("BBMLAB_OUTPUT_DIR")) dir = env;
  }
  if (dir.empty()) dir = ".";
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw io_error("cannot create output directory: " + dir);
  return dir;
}

std::string comment_header(std::uint64_t config_hash, std::uint64_t seed,
                           const std::vector<std::string>& lines) {
  char buf[64];
  std::string out;
  std::snprintf(buf, sizeof(buf), "# config_hash %016llx\n",
                static_cast<unsigned long long>(config_hash));
  out += buf;
  std::snprintf(buf, sizeof(buf), "# master_seed %llu\n",
                static_cast<unsigned long long>(seed));
  out += buf;
  for (const auto& line : lines) {
    out += "# ";
    out += line;
    out += '\n';
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw io_error("cannot open for writing: " + path);
  f << content;
  f.flush();
  if (!f) throw io_error("write failed: " + path);
}

}  // namespace bbmlab
