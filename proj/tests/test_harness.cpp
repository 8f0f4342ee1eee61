// End-to-end tests of the command-line tool: exit codes, artifact schemas,
// config-file merging, and reproducibility stamps.  Each case runs the real
// binary (path injected at compile time) against a throwaway directory.
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "doctest.h"
#include "oracles.hpp"

namespace fs = std::filesystem;
namespace golden = oracle::golden;

namespace {

const char* cli_path() { return BBMLAB_CLI_PATH; }

struct TempDir {
  fs::path path;
  TempDir() {
    static std::atomic<int> counter{0};
    path = fs::temp_directory_path() /
           ("bbmlab_cli_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string str() const { return path.string(); }
};

int run_cli(const std::string& args, const fs::path& log,
            const std::string& env_prefix = "") {
  std::string cmd = env_prefix + "\"" + cli_path() + "\" " + args + " > \"" +
                    log.string() + "\" 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f.good());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

nlohmann::json read_json(const fs::path& p) {
  return nlohmann::json::parse(slurp(p));
}

// Value of a "# key value..." header line.
std::string header_string(const std::string& text, const std::string& key) {
  const std::string tag = "# " + key + " ";
  const auto pos = text.find(tag);
  REQUIRE(pos != std::string::npos);
  const auto end = text.find('\n', pos);
  return text.substr(pos + tag.size(), end - pos - tag.size());
}

double header_value(const std::string& text, const std::string& key) {
  return std::stod(header_string(text, key));
}

std::vector<std::string> data_lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (!line.empty() && line[0] != '#') out.push_back(line);
  }
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

bool is_hex16(const std::string& s) {
  if (s.size() != 16) return false;
  for (char c : s) {
    if (!std::isxdigit(static_cast<unsigned char>(c)) ||
        std::isupper(static_cast<unsigned char>(c))) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("cli exit codes follow the error taxonomy") {
  TempDir dir;
  const fs::path log = dir.path / "log.txt";

  CHECK(run_cli("", log) == 2);                        // missing subcommand
  CHECK(run_cli("--help", log) == 0);                  // help is not an error
  CHECK(run_cli("predict --bogus 1", log) == 2);       // unknown option

  // Domain errors from the library exit 2 and name the cause.
  CHECK(run_cli("predict --sigma linear2 --T 2 --output-dir " + dir.str(),
                log) == 2);
  const std::string msg = slurp(log);
  CHECK(msg.find("error:") != std::string::npos);
  CHECK(msg.find("horizon too small") != std::string::npos);

  // Unwritable output directory exits 3.
  CHECK(run_cli("--output-dir /proc/nonexistent/x predict --sigma linear2 "
                "--T 100",
                log) == 3);

  // Numerical budget violations exit 4.
  CHECK(run_cli("simulate-bbm --T 20 --prune-depth inf --population-cap 500 "
                "--replicas 1 --output-dir " +
                    dir.str(),
                log) == 4);
  CHECK(slurp(log).find("pruning depth too large") != std::string::npos);
}

TEST_CASE("prediction artifact carries the frozen reference values") {
  TempDir dir;
  const fs::path log = dir.path / "log.txt";
  REQUIRE(run_cli("predict --sigma linear2 --T 1000 --K 2 --output-dir " +
                      dir.str(),
                  log) == 0);
  CHECK(slurp(log).find("predict:") != std::string::npos);

  const auto j = read_json(dir.path / "prediction.json");
  CHECK(j["schema_version"] == 1);
  CHECK(j["subcommand"] == "predict");
  CHECK(is_hex16(j["config_hash"].get<std::string>()));
  CHECK(j["master_seed"] == 0);
  CHECK(j["sigma"] == "linear2");
  CHECK(j["T"] == 1000.0);
  CHECK(j["v1"].get<double>() == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(j["w1"].get<double>() ==
        doctest::Approx(golden::kW1Linear2).epsilon(1e-10));
  CHECK(j["m_prime"].get<double>() ==
        doctest::Approx(golden::kMPrime1000Linear2).epsilon(1e-10));
  CHECK(j["sigma0"].get<double>() == doctest::Approx(2.0));
  CHECK(j["sigma1"].get<double>() == doctest::Approx(1.0));
  CHECK(j["epsilon"].get<double>() ==
        doctest::Approx(6.0 / 70.0).epsilon(1e-12));
  CHECK(j["s0"].get<double>() > 0.0);

  REQUIRE(j["gamma_samples"].size() == 65);
  REQUIRE(j["zeta_samples"].size() == 65);
  CHECK(j["gamma_samples"][0][0].get<double>() == 0.0);
  CHECK(j["gamma_samples"][0][1].get<double>() == doctest::Approx(0.0));
  CHECK(j["gamma_samples"][64][0].get<double>() == doctest::Approx(1000.0));
  // The envelope ends near the predicted front location.
  const double gT = j["gamma_samples"][64][1].get<double>();
  const double mp = j["m_prime"].get<double>();
  CHECK(std::abs(gT - (mp + j["sigma1"].get<double>() * std::log(1000.0))) <
        1e-6);
}

TEST_CASE("config files merge with command-line precedence") {
  TempDir dir;
  const fs::path log = dir.path / "log.txt";
  const fs::path ini = dir.path / "cfg.ini";

  {
    std::ofstream f(ini);
    f << "[predict]\nsigma=linear2\nT=500\n";
  }
  REQUIRE(run_cli("--config " + ini.string() + " --output-dir " + dir.str() +
                      " predict",
                  log) == 0);
  CHECK(read_json(dir.path / "prediction.json")["T"] == 500.0);

  // An explicit flag wins over the file value.
  REQUIRE(run_cli("--config " + ini.string() + " --output-dir " + dir.str() +
                      " predict --T 800",
                  log) == 0);
  CHECK(read_json(dir.path / "prediction.json")["T"] == 800.0);

  // Unknown keys in the file are rejected, not ignored.
  {
    std::ofstream f(ini);
    f << "[predict]\nsigma=linear2\nT=500\nbogus=1\n";
  }
  CHECK(run_cli("--config " + ini.string() + " --output-dir " + dir.str() +
                    " predict",
                log) == 2);
}

TEST_CASE("csv artifacts start with the configuration stamp") {
  TempDir dir;
  const fs::path log = dir.path / "log.txt";
  REQUIRE(run_cli("validate-airy --n-max 5 --output-dir " + dir.str(), log) ==
          0);
  const std::string csv = slurp(dir.path / "airy_validation.csv");
  CHECK(csv.rfind("# config_hash ", 0) == 0);  // first line
  CHECK(is_hex16(header_string(csv, "config_hash")));
  CHECK(header_string(csv, "master_seed") == "0");

  const auto rows = data_lines(csv);
  REQUIRE(rows.size() == 5);
  const auto first = split_csv(rows[0]);
  REQUIRE(first.size() == 5);
  CHECK(std::stoi(first[0]) == 1);
  CHECK(std::stod(first[1]) == doctest::Approx(golden::kAlpha1).epsilon(1e-10));
  CHECK(std::stod(first[2]) ==
        doctest::Approx(std::fabs(golden::kAipAtMinusAlpha1)).epsilon(1e-10));
  CHECK(std::stod(first[3]) < 1e-6);   // orthonormality defect
  CHECK(std::stod(first[4]) < 1e-3);   // eigen-relation residual
}

TEST_CASE("hashes tie the artifacts of one run together") {
  TempDir d1, d2;
  const fs::path log = d1.path / "log.txt";
  const std::string base =
      "simulate-bbm --T 10 --replicas 4 --prune-depth 8 ";
  REQUIRE(run_cli(base + "--seed 9 --output-dir " + d1.str(), log) == 0);
  REQUIRE(run_cli(base + "--seed 10 --output-dir " + d2.str(), log) == 0);

  const auto j1 = read_json(d1.path / "bbm_summary.json");
  const auto j2 = read_json(d2.path / "bbm_summary.json");
  const std::string h1 = j1["config_hash"].get<std::string>();
  const std::string h2 = j2["config_hash"].get<std::string>();
  CHECK(is_hex16(h1));
  CHECK(h1 != h2);  // the seed is part of the scientific config
  CHECK(j1["master_seed"] == 9);
  CHECK(j2["master_seed"] == 10);

  // The sample table of the same run carries the same stamp.
  const std::string csv1 = slurp(d1.path / "bbm_samples.csv");
  CHECK(header_string(csv1, "config_hash") == h1);
  CHECK(header_string(csv1, "master_seed") == "9");
  CHECK(data_lines(csv1).size() == 4);
  CHECK(j1["m_hat"].is_number());
  CHECK(!j1.contains("crossing"));  // no offsets requested
}

TEST_CASE("simulation outputs are byte-identical across worker counts") {
  TempDir d1, d2;
  const fs::path log = d1.path / "log.txt";
  const std::string base =
      "simulate-bbm --sigma linear2 --T 10 --replicas 12 --prune-depth 8 "
      "--K-list 1 2 --seed 9 ";
  REQUIRE(run_cli(base + "--threads 1 --output-dir " + d1.str(), log) == 0);
  REQUIRE(run_cli(base + "--threads 4 --output-dir " + d2.str(), log) == 0);
  CHECK(slurp(d1.path / "bbm_samples.csv") == slurp(d2.path / "bbm_samples.csv"));
  CHECK(slurp(d1.path / "bbm_summary.json") ==
        slurp(d2.path / "bbm_summary.json"));

  const auto j = read_json(d1.path / "bbm_summary.json");
  REQUIRE(j.contains("crossing"));
  REQUIRE(j.contains("tail"));
  CHECK(j["crossing"]["rows"].size() == 2);
  CHECK(j["crossing"].contains("slope_raw"));
  CHECK(j["crossing"].contains("slope_adjusted"));
  CHECK(j["tail"].contains("m_hat"));

  TempDir g1, g2;
  const std::string gbase = "gibbs --t 6 --replicas 8 --seed 4 ";
  REQUIRE(run_cli(gbase + "--threads 1 --output-dir " + g1.str(), log) == 0);
  REQUIRE(run_cli(gbase + "--threads 3 --output-dir " + g2.str(), log) == 0);
  CHECK(slurp(g1.path / "gibbs_replicas.csv") ==
        slurp(g2.path / "gibbs_replicas.csv"));
  CHECK(slurp(g1.path / "gibbs_histogram.csv") ==
        slurp(g2.path / "gibbs_histogram.csv"));
}

TEST_CASE("spectral cli writes modes, oracle gap, and snapshots") {
  TempDir dir;
  const fs::path log = dir.path / "log.txt";
  REQUIRE(run_cli("solve-airy --q ramp --epsilon 0.04 --t 0.5 --oracle "
                  "--snapshots 3 --output-dir " +
                      dir.str(),
                  log) == 0);
  CHECK(slurp(log).find("oracle_gap=") != std::string::npos);

  const std::string modes = slurp(dir.path / "spectral_modes.csv");
  CHECK(header_value(modes, "oracle_gap") < 1e-3);
  const auto rows = data_lines(modes);
  REQUIRE(rows.size() >= 12);
  CHECK(split_csv(rows[0]).size() == 2);
  CHECK(std::stoi(split_csv(rows[0])[0]) == 1);

  const std::string field = slurp(dir.path / "spectral_field.csv");
  const auto frows = data_lines(field);
  REQUIRE(frows.size() == 601);  // y in [0, 12] at dy = 0.02
  CHECK(split_csv(frows[0]).size() == 4);  // x plus three snapshot columns
  CHECK(std::stod(split_csv(frows[0])[0]) == doctest::Approx(0.0));
  CHECK(std::stod(split_csv(frows[600])[0]) == doctest::Approx(12.0));
}

TEST_CASE("front-tracking cli sweeps horizons and fits when spread allows") {
  TempDir dir;
  const fs::path log = dir.path / "log.txt";

  // Two horizons cannot support the four-term fit: the sweep still writes
  // fronts but flags the skipped fit and emits no script.
  REQUIRE(run_cli("solve-fkpp --sigma linear2 --T 20 40 --output-dir " +
                      dir.str(),
                  log) == 0);
  const std::string fronts = slurp(dir.path / "fkpp_fronts.csv");
  CHECK(fronts.find("# expansion fit skipped: insufficient horizon spread") !=
        std::string::npos);
  CHECK(data_lines(fronts).size() == 2);
  CHECK(!fs::exists(dir.path / "fkpp_fit.gp"));

  TempDir dir2;
  REQUIRE(run_cli("solve-fkpp --sigma linear2 --T 8 12 18 27 40 80 "
                  "--output-dir " +
                      dir2.str(),
                  log) == 0);
  const std::string swept = slurp(dir2.path / "fkpp_fronts.csv");
  const auto rows = data_lines(swept);
  REQUIRE(rows.size() == 6);
  for (const auto& row : rows) {
    const auto cells = split_csv(row);
    REQUIRE(cells.size() == 4);
    // gap column is front_median - m_prime.
    CHECK(std::stod(cells[3]) ==
          doctest::Approx(std::stod(cells[1]) - std::stod(cells[2]))
              .epsilon(1e-9));
  }
  const std::string gp = slurp(dir2.path / "fkpp_fit.gp");
  CHECK(gp.find("f(x) = c_T*x + c_T13*x**(1.0/3.0)") != std::string::npos);
  CHECK(gp.find("set datafile separator") != std::string::npos);
  CHECK(gp.find("plot \"fkpp_fronts.csv\"") != std::string::npos);
  const auto cpos = gp.find("c_T = ");
  REQUIRE(cpos != std::string::npos);
  const double c_T = std::stod(gp.substr(cpos + 6));
  CHECK(c_T > 1.0);
  CHECK(c_T < 2.0);
}

TEST_CASE("gibbs cli reports pooled statistics in both modes") {
  TempDir dir;
  const fs::path log = dir.path / "log.txt";
  REQUIRE(run_cli("gibbs --t 5 --replicas 30 --seed 2 --output-dir " +
                      dir.str(),
                  log) == 0);
  const std::string free_csv = slurp(dir.path / "gibbs_replicas.csv");
  CHECK(free_csv.find("# mode: free") != std::string::npos);
  CHECK(free_csv.find("mean_D_expected") == std::string::npos);
  CHECK(std::isfinite(header_value(free_csv, "pooled_ks")));
  CHECK(header_value(free_csv, "negative_mass_fraction") >= 0.0);
  CHECK(data_lines(free_csv).size() == 30);

  const std::string hist = slurp(dir.path / "gibbs_histogram.csv");
  const auto hrows = data_lines(hist);
  REQUIRE(hrows.size() == 80);
  CHECK(split_csv(hrows[0]).size() == 3);
  CHECK(std::stod(split_csv(hrows[0])[0]) == doctest::Approx(0.025));
  CHECK(std::stod(split_csv(hrows[79])[0]) == doctest::Approx(3.975));

  TempDir kdir;
  REQUIRE(run_cli("gibbs --t 5 --replicas 30 --killed --x 0.8 --seed 2 "
                  "--output-dir " +
                      kdir.str(),
                  log) == 0);
  const std::string killed_csv = slurp(kdir.path / "gibbs_replicas.csv");
  CHECK(killed_csv.find("# mode: killed (absorbed at 0)") != std::string::npos);
  CHECK(header_value(killed_csv, "mean_D_expected") ==
        doctest::Approx(0.8 * std::exp(-0.8)).epsilon(1e-12));
  CHECK(header_value(killed_csv, "second_moment_times_ex") >= 0.0);
  CHECK(header_value(killed_csv, "negative_mass_fraction") == 0.0);
}

TEST_CASE("the output directory environment variable is honored") {
  TempDir dir;
  const fs::path log = dir.path / "log.txt";
  const fs::path sub = dir.path / "env_out";
  REQUIRE(run_cli("validate-airy --n-max 2", log,
                  "BBMLAB_OUTPUT_DIR=\"" + sub.string() + "\" ") == 0);
  CHECK(fs::exists(sub / "airy_validation.csv"));
}
