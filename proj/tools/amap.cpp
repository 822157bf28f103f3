// amap: sample acyclic mappings, run the subtree-relocation chain, encode
// and decode lattice bridge paths, compare rooted weighted trees, and run
// the Monte Carlo verification suites.

#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "amap/amap.hpp"

namespace {

struct Output {
  std::ofstream file;
  std::ostream* os = nullptr;
  explicit Output(const std::string& path) {
    if (path == "-") {
      os = &std::cout;
    } else {
      file.open(path);
      if (!file) throw std::runtime_error("cannot open output file " + path);
      os = &file;
    }
  }
  std::ostream& stream() { return *os; }
};

int run(int argc, char** argv) {
  CLI::App app{"acyclic random mapping toolkit"};
  app.require_subcommand(1);

  // ---- sample ----
  auto* c_sample = app.add_subcommand("sample", "draw uniform acyclic mappings");
  int s_n = 10;
  long s_count = 1;
  std::uint64_t s_seed = 1;
  std::string s_out = "-";
  c_sample->add_option("--n", s_n, "ground set size")->required();
  c_sample->add_option("--count", s_count, "number of draws");
  c_sample->add_option("--seed", s_seed, "master seed");
  c_sample->add_option("--out", s_out, "output file (JSON lines), - for stdout");

  // ---- chain ----
  auto* c_chain = app.add_subcommand("chain", "run the subtree-relocation chain");
  int h_n = 10;
  long h_steps = 1000;
  long h_stride = 1;
  std::uint64_t h_seed = 1;
  std::string h_observe = "fixed-points";
  std::string h_out = "-";
  std::string h_start;
  c_chain->add_option("--n", h_n, "ground set size")->required();
  c_chain->add_option("--steps", h_steps, "number of steps");
  c_chain->add_option("--stride", h_stride, "record every stride steps");
  c_chain->add_option("--seed", h_seed, "master seed");
  c_chain->add_option("--observe", h_observe, "comma list: fixed-points,height");
  c_chain->add_option("--start", h_start, "mapping JSON to start from (default: identity)");
  c_chain->add_option("--out", h_out, "output CSV, - for stdout");

  // ---- encode / decode ----
  auto* c_encode = app.add_subcommand("encode", "mapping JSON -> lattice path JSON");
  std::string e_in, e_out = "-";
  c_encode->add_option("--in", e_in, "mapping JSON file")->required();
  c_encode->add_option("--out", e_out, "output file, - for stdout");

  auto* c_decode = app.add_subcommand("decode", "lattice path JSON -> canonical mapping");
  std::string d_in, d_out = "-";
  c_decode->add_option("--in", d_in, "path JSON file")->required();
  c_decode->add_option("--out", d_out, "output file, - for stdout");

  // ---- tree-dist ----
  auto* c_tdist = app.add_subcommand("tree-dist", "weighted rooted tree comparison");
  std::string t_a, t_b, t_mode = "exact";
  c_tdist->add_option("--a", t_a, "tree JSON")->required();
  c_tdist->add_option("--b", t_b, "tree JSON")->required();
  c_tdist->add_option("--mode", t_mode, "exact|bracket")
      ->check(CLI::IsMember({"exact", "bracket"}));

  // ---- verify ----
  auto* c_verify = app.add_subcommand("verify", "Monte Carlo verification suites");
  std::string v_suite;
  long v_reps = 20000;
  int v_grid = 8192;
  int v_n = 10000;
  std::uint64_t v_seed = 1;
  double v_cutoff = 0.2;
  std::string v_out = "-";
  c_verify->add_option("--suite", v_suite, "shifted-excursion|disintegration|jump-square|convergence")
      ->required()
      ->check(CLI::IsMember({"shifted-excursion", "disintegration", "jump-square",
                             "convergence"}));
  c_verify->add_option("--reps", v_reps, "replications (samples for convergence)");
  c_verify->add_option("--grid", v_grid, "grid intervals");
  c_verify->add_option("--n", v_n, "mapping size (convergence suite)");
  c_verify->add_option("--cutoff", v_cutoff, "duration cutoff (disintegration suite)");
  c_verify->add_option("--seed", v_seed, "master seed");
  c_verify->add_option("--out", v_out, "output CSV, - for stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (c_sample->parsed()) {
    amap::RngStream rng(s_seed);
    Output out(s_out);
    for (long k = 0; k < s_count; ++k) {
      amap::AcyclicMapping m = amap::sample_uniform_acyclic(s_n, rng);
      out.stream() << amap::to_json(m.mapping()).dump() << "\n";
    }
    std::cerr << "sampled " << s_count << " acyclic mappings of [" << s_n << "]\n";
    return 0;
  }

  if (c_chain->parsed()) {
    amap::RngStream rng(h_seed);
    amap::AcyclicMapping m0 = [&] {
      if (!h_start.empty()) {
        amap::Mapping m = amap::load_json_file(h_start, amap::mapping_from_json);
        return amap::AcyclicMapping::checked(std::move(m));
      }
      amap::Mapping ident;
      ident.n = h_n;
      for (int v = 1; v <= h_n; ++v) ident.image.push_back(v);
      return amap::AcyclicMapping::unchecked(std::move(ident));
    }();
    if (m0.n() != h_n) throw std::invalid_argument("--start mapping size differs from --n");

    std::vector<amap::Observer> obs;
    std::stringstream names(h_observe);
    std::string name;
    while (std::getline(names, name, ',')) {
      if (name == "fixed-points")
        obs.push_back(amap::fixed_points_observer());
      else if (name == "height")
        obs.push_back(amap::height_observer());
      else if (!name.empty())
        throw std::invalid_argument("unknown observer: " + name);
    }
    amap::RunSummary sum = amap::run_chain(m0, h_steps, rng, obs, h_stride);
    Output out(h_out);
    out.stream() << "step";
    for (const auto& nm : sum.names) out.stream() << "," << nm;
    out.stream() << "\n";
    for (std::size_t k = 0; k < sum.rows.size(); ++k) {
      out.stream() << sum.recorded_steps[k];
      for (double v : sum.rows[k]) out.stream() << "," << v;
      out.stream() << "\n";
    }
    std::cerr << "chain: n=" << h_n << " steps=" << h_steps << " recorded "
              << sum.rows.size() << " rows\n";
    return 0;
  }

  if (c_encode->parsed()) {
    amap::Mapping m = amap::load_json_file(e_in, amap::mapping_from_json);
    amap::LatticePath p = amap::encode(amap::AcyclicMapping::checked(std::move(m)));
    Output out(e_out);
    out.stream() << amap::to_json(p).dump() << "\n";
    std::cerr << "encoded mapping of [" << p.n << "] into a path of length " << 2 * p.n
              << "\n";
    return 0;
  }

  if (c_decode->parsed()) {
    amap::LatticePath p = amap::load_json_file(d_in, amap::path_from_json);
    amap::AcyclicMapping m = amap::decode(p);
    Output out(d_out);
    out.stream() << amap::to_json(m.mapping()).dump() << "\n";
    std::cerr << "decoded path of length " << 2 * p.n << " into its canonical mapping\n";
    return 0;
  }

  if (c_tdist->parsed()) {
    amap::RootedWeightedTree A = amap::load_json_file(t_a, amap::tree_from_json);
    amap::RootedWeightedTree B = amap::load_json_file(t_b, amap::tree_from_json);
    if (t_mode == "exact") {
      amap::DeltaResult d = amap::delta_ghwr(A, B);
      if (!d.exact)
        throw std::domain_error(
            "exact comparison needs both trees to have at most 8 vertices; use --mode bracket");
      std::cout << d.value() << "\n";
      std::cerr << "exact comparison over vertex maps\n";
    } else {
      amap::DeltaResult d = amap::delta_ghwr(A, B);
      auto [lo, hi] = amap::d_ghwr_bracket(A, B);
      std::cout << d.lower << " " << d.upper << " " << lo << " " << hi << "\n";
      std::cerr << "comparison bracket, then metric bracket (quarter power)\n";
    }
    return 0;
  }

  if (c_verify->parsed()) {
    amap::RngStream base(v_seed);
    std::vector<amap::EstimatorReport> reports;
    if (v_suite == "shifted-excursion") {
      reports = amap::verify_shifted_excursion(v_reps, v_grid, base);
    } else if (v_suite == "disintegration") {
      reports = amap::verify_disintegration(v_reps, v_grid, base, v_cutoff);
    } else if (v_suite == "jump-square") {
      reports = amap::verify_jump_square(v_reps, v_grid, base);
    } else {
      reports = amap::chain_convergence(v_n, v_reps, base);
    }
    Output out(v_out);
    amap::write_reports_csv(out.stream(), reports);
    int bad = 0;
    for (const auto& r : reports)
      if (r.z_score && std::abs(*r.z_score) >= 3.0) bad++;
    std::cerr << "suite " << v_suite << ": " << reports.size() << " estimators, " << bad
              << " with |z| >= 3\n";
    return 0;
  }

  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
