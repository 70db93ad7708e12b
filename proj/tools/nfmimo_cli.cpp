// nfmimo: batch driver for synthesis, simulation, reconstruction, evaluation and analysis.
//
// Exit codes: 0 success, 2 usage / invalid argument, 3 numerical failure, 4 I/O or format error.
// Errors are reported on stderr as a single JSON object.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <omp.h>

#include "nfmimo/nfmimo.hpp"

namespace fs = std::filesystem;
using namespace nfmimo;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

struct Common {
  std::string config_path;
  std::optional<std::size_t> steps;
  int threads = 0;
};

ImagingConfig resolve_config(const Common& c, const json* embedded = nullptr) {
  ImagingConfig cfg;
  if (!c.config_path.empty())
    cfg = load_config(c.config_path);
  else if (embedded && embedded->contains("config"))
    cfg = config_from_json(embedded->at("config"));
  else
    cfg = reference_config();
  if (c.steps) {
    cfg.freqs.n_steps = *c.steps;
    cfg.pulse_spectrum.clear();
    cfg.validate();
  }
  return cfg;
}

double parse_snr(const std::string& text) {
  if (text == "inf" || text == "+inf" || text == "Inf") return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw InvalidArgument("invalid SNR '" + text + "'");
  }
  if (used != text.size() || !std::isfinite(v)) throw InvalidArgument("invalid SNR '" + text + "'");
  return v;
}

json snr_json(double snr) { return std::isfinite(snr) ? json(snr) : json("inf"); }

json provenance(const ImagingConfig& cfg) {
  return {{"config_hash", config_hash(cfg)}, {"config", config_to_json(cfg)}};
}

/// Parses "a:b:c" (start:stop:step, inclusive) or a comma list, in centimeters.
std::vector<double> parse_separations_cm(const std::string& text) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    std::vector<double> parts;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ':')) parts.push_back(std::stod(tok));
    if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0])
      throw InvalidArgument("--sep-cm expects start:stop:step with step > 0");
    const auto count = static_cast<std::size_t>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) out.push_back(parts[0] + static_cast<double>(i) * parts[2]);
  } else {
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) out.push_back(std::stod(tok));
  }
  return out;
}

Tensor volume_tensor(const ReflectivityVolume& v, json meta) {
  return Tensor::from_complex(volume_shape(v.grid), v.values, DType::c128, std::move(meta));
}

Tensor real_volume_tensor(const RealVolume& v, DType dtype, json meta) {
  return Tensor::from_real(volume_shape(v.grid), v.values, dtype, std::move(meta));
}

MeasurementVector read_measurements(const std::string& path, const ImagingConfig& cfg) {
  const Tensor t = read_tensor(path);
  MeasurementVector y{t.to_complex()};
  if (y.values.size() != cfg.num_measurements())
    throw InvalidArgument("measurement file has " + std::to_string(y.values.size()) + " entries, config expects " +
                          std::to_string(cfg.num_measurements()));
  return y;
}

ReflectivityVolume read_volume(const std::string& path, const VoxelGrid& grid) {
  const Tensor t = read_tensor(path);
  if (t.element_count() != grid.size()) throw InvalidArgument(path + ": volume size does not match the voxel grid");
  return {grid, t.to_complex()};
}

/// Grid from a volume's own metadata when present, otherwise from the config.
VoxelGrid volume_grid(const Tensor& t, const ImagingConfig& fallback) {
  if (t.meta.contains("grid")) return grid_from_json(t.meta.at("grid"));
  if (t.meta.contains("config")) return config_from_json(t.meta.at("config")).grid;
  return fallback.grid;
}

// --- subcommands ------------------------------------------------------------------------------

struct SynthArgs {
  std::string out;
  std::size_t n = 1;
  std::uint64_t seed = 0;
  bool random_phase = false;
  std::string kind = "extended";
  std::vector<double> semi_axes_m{0.05, 0.05, 0.1};
};

void run_synth(const Common& c, const SynthArgs& a) {
  const ImagingConfig cfg = resolve_config(c);
  const fs::path out_dir(a.out);
  if (a.kind == "extended") {
    const DatasetManifest m = generate_dataset(cfg.grid, a.n, a.seed, a.random_phase, out_dir, c.threads);
    std::cout << json{{"scenes", m.scenes.size()}, {"manifest", (out_dir / "manifest.json").string()}}.dump() << '\n';
    return;
  }
  std::vector<SceneRecord> scenes;
  if (a.kind == "ellipsoid") {
    if (a.semi_axes_m.size() != 3) throw InvalidArgument("--semi-axes needs three values");
    scenes.push_back(ellipsoid_scene(cfg.grid, {a.semi_axes_m[0], a.semi_axes_m[1], a.semi_axes_m[2]}, cfg.grid.center));
  } else if (a.kind == "resolution") {
    scenes = resolution_scenes(cfg.grid);
  } else {
    throw InvalidArgument("unknown scene kind '" + a.kind + "'");
  }
  fs::create_directories(out_dir);
  DatasetManifest m{cfg.grid, a.seed, {}};
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    if (a.random_phase) add_random_phase(scenes[i].truth, scene_seed(a.seed, i));
    scenes[i].seed = a.random_phase ? scene_seed(a.seed, i) : 0;
    write_tensor(out_dir / scene_file_name(i), scene_tensor(scenes[i]));
    m.scenes.push_back({scene_file_name(i), scenes[i].seed, a.random_phase});
  }
  write_json_file(out_dir / "manifest.json", m.to_json());
  std::cout << json{{"scenes", m.scenes.size()}, {"manifest", (out_dir / "manifest.json").string()}}.dump() << '\n';
}

struct SimulateArgs {
  std::string scene;
  std::string out;
  std::string snr = "inf";
  std::uint64_t seed = 0;
};

void run_simulate(const Common& c, const SimulateArgs& a) {
  const ImagingConfig cfg = resolve_config(c);
  const Tensor scene_t = read_tensor(a.scene);
  const ReflectivityVolume s = read_volume(a.scene, cfg.grid);
  const double snr = parse_snr(a.snr);
  const ObservationOperator op(cfg, detail::uncached());
  const MeasurementVector clean{op.forward(s.values)};
  const double energy = squared_norm(clean.values);
  const MeasurementVector y = add_noise(clean, NoiseSpec{snr, a.seed});
  json meta = provenance(cfg);
  meta["kind"] = "measurements";
  meta["seed"] = a.seed;
  meta["snr_db"] = snr_json(snr);
  meta["signal_energy"] = energy;
  meta["noise_sigma"] = std::isfinite(snr) ? noise_sigma_from_snr(energy, y.values.size(), snr) : 0.0;
  if (scene_t.meta.contains("seed")) meta["scene_seed"] = scene_t.meta.at("seed");
  write_tensor(a.out, Tensor::from_complex({y.values.size()}, y.values, DType::c128, meta));
}

struct ReconArgs {
  std::string meas;
  std::string out;
  bool complex_out = false;
};

json recon_meta(const ImagingConfig& cfg, const Tensor& meas, const char* method) {
  json meta = provenance(cfg);
  meta["kind"] = "reconstruction";
  meta["method"] = method;
  meta["grid"] = grid_to_json(cfg.grid);
  if (meas.meta.contains("seed")) meta["seed"] = meas.meta.at("seed");
  if (meas.meta.contains("scene_seed")) meta["scene_seed"] = meas.meta.at("scene_seed");
  return meta;
}

void run_adjoint(const Common& c, const ReconArgs& a) {
  const Tensor mt = read_tensor(a.meas);
  const ImagingConfig cfg = resolve_config(c, &mt.meta);
  const MeasurementVector y = read_measurements(a.meas, cfg);
  const ObservationOperator op(cfg, detail::uncached());
  json meta = recon_meta(cfg, mt, "adjoint");
  if (a.complex_out) {
    write_tensor(a.out, volume_tensor({cfg.grid, op.adjoint(y.values)}, meta));
    return;
  }
  const AdjointImage img = adjoint_image(op, y);
  meta["normalization_scale"] = img.scale;
  write_tensor(a.out, real_volume_tensor(img.image, DType::f64, meta));
}

void run_bp(const Common& c, const ReconArgs& a) {
  const Tensor mt = read_tensor(a.meas);
  const ImagingConfig cfg = resolve_config(c, &mt.meta);
  const MeasurementVector y = read_measurements(a.meas, cfg);
  write_tensor(a.out, volume_tensor(backprojection(cfg, y), recon_meta(cfg, mt, "backprojection")));
}

struct TvArgs {
  ReconArgs io;
  TvParams params;
  std::optional<double> eps;
  std::string trace;
};

void run_tv(const Common& c, TvArgs a) {
  const Tensor mt = read_tensor(a.io.meas);
  const ImagingConfig cfg = resolve_config(c, &mt.meta);
  const MeasurementVector y = read_measurements(a.io.meas, cfg);
  a.params.eps = a.eps;
  const TvResult r = tv_solve(cfg, y, a.params);
  json meta = recon_meta(cfg, mt, "tv");
  meta["lambda"] = a.params.lambda;
  meta["eps"] = r.eps;
  write_tensor(a.io.out, volume_tensor(r.volume, meta));
  const std::string trace_path = a.trace.empty() ? a.io.out + ".trace.json" : a.trace;
  write_json_file(trace_path, {{"objective_trace", r.objective_trace},
                               {"eps", r.eps},
                               {"lambda", a.params.lambda},
                               {"outer_iterations", r.outer_iterations},
                               {"cg_iterations", r.cg_iterations},
                               {"config_hash", config_hash(cfg)}});
}

struct MetricsArgs {
  std::string recon;
  std::string truth;
  bool normalize = false;
};

void run_metrics(const Common& c, const MetricsArgs& a) {
  const Tensor tt = read_tensor(a.truth);
  const Tensor rt = read_tensor(a.recon);
  const ImagingConfig fallback = resolve_config(c);
  const VoxelGrid grid = volume_grid(tt, fallback);
  if (tt.element_count() != grid.size() || rt.element_count() != grid.size())
    throw InvalidArgument("metrics: volumes do not match the voxel grid");
  RealVolume truth = ReflectivityVolume{grid, tt.to_complex()}.magnitude();
  RealVolume recon = ReflectivityVolume{grid, rt.to_complex()}.magnitude();
  if (a.normalize) recon = normalize_by_max(std::move(recon)).image;
  std::cout << json{{"psnr_db", psnr3d(truth, recon)}, {"ssim", ssim_slice_avg(truth, recon)}}.dump() << '\n';
}

struct CondArgs {
  std::size_t targets = 2;
  std::string orientation = "xy";
  std::string sep_cm = "1:20:1";
  std::string out;
};

void run_condnum(const Common& c, const CondArgs& a) {
  const ImagingConfig cfg = resolve_config(c);
  Orientation o;
  if (a.orientation == "xy")
    o = Orientation::cross_range;
  else if (a.orientation == "z")
    o = Orientation::range;
  else
    throw InvalidArgument("--orientation must be xy or z");
  std::vector<double> seps = parse_separations_cm(a.sep_cm);
  for (double& s : seps) s /= 100.0;
  const std::string csv = condition_sweep(cfg, a.targets, seps, o).to_csv();
  if (a.out.empty()) {
    std::cout << csv;
  } else {
    std::ofstream f(a.out);
    if (!f) throw IoError("cannot open " + a.out);
    f << csv;
  }
}

struct ExportArgs {
  std::string out;
  std::size_t n_train = 800, n_val = 100, n_test = 100;
  std::uint64_t seed = 0;
  std::string snr = "30";
  bool no_random_phase = false;
  std::string dtype = "f32";
};

void run_export(const Common& c, const ExportArgs& a) {
  const ImagingConfig cfg = resolve_config(c);
  const double snr = parse_snr(a.snr);
  const auto dtype = parse_dtype(a.dtype);
  if (!dtype || is_complex(*dtype)) throw InvalidArgument("--dtype must be f32 or f64");
  const fs::path root(a.out);
  const ObservationOperator op(cfg);
  const std::string hash = config_hash(cfg);
  json manifest = {{"base_seed", a.seed},
                   {"grid", grid_to_json(cfg.grid)},
                   {"config_hash", hash},
                   {"config", config_to_json(cfg)},
                   {"snr_db", snr_json(snr)},
                   {"random_phase", !a.no_random_phase},
                   {"partitions", json::object()}};
  std::size_t global = 0;
  const std::pair<const char*, std::size_t> parts[] = {{"train", a.n_train}, {"val", a.n_val}, {"test", a.n_test}};
  for (const auto& [name, count] : parts) {
    const fs::path dir = root / name;
    fs::create_directories(dir);
    json entries = json::array();
    for (std::size_t i = 0; i < count; ++i, ++global) {
      SceneSpec spec;
      spec.seed = scene_seed(a.seed, global);
      spec.random_phase = !a.no_random_phase;
      const SceneRecord rec = generate_scene(cfg.grid, spec);
      const MeasurementVector y =
          add_noise(MeasurementVector{op.forward(rec.truth.values)}, NoiseSpec{snr, substream_seed(spec.seed, 2)});
      const AdjointImage img = adjoint_image(op, y);
      const RealVolume target = rec.truth.magnitude();
      char in_name[32], tg_name[32];
      std::snprintf(in_name, sizeof in_name, "input_%05zu.nft", i);
      std::snprintf(tg_name, sizeof tg_name, "target_%05zu.nft", i);
      json meta = {{"config_hash", hash}, {"seed", spec.seed}, {"snr_db", snr_json(snr)}, {"grid", grid_to_json(cfg.grid)}};
      json in_meta = meta;
      in_meta["kind"] = "adjoint_image";
      in_meta["normalization_scale"] = img.scale;
      json tg_meta = meta;
      tg_meta["kind"] = "ground_truth_magnitude";
      write_tensor(dir / in_name, real_volume_tensor(img.image, *dtype, in_meta));
      write_tensor(dir / tg_name, real_volume_tensor(target, *dtype, tg_meta));
      entries.push_back({{"input", std::string(name) + "/" + in_name},
                         {"path", std::string(name) + "/" + tg_name},
                         {"seed", spec.seed},
                         {"random_phase", spec.random_phase}});
    }
    manifest["partitions"][name] = {{"scenes", entries}};
  }
  write_json_file(root / "manifest.json", manifest);
  std::cout << json{{"manifest", (root / "manifest.json").string()}, {"scenes", global}}.dump() << '\n';
}

struct BenchArgs {
  std::size_t n = 100;
  std::uint64_t seed = 0;
  std::string snr = "30";
  std::string methods = "adjoint,bp";
  TvParams tv;
};

void run_bench(const Common& c, const BenchArgs& a) {
  const ImagingConfig cfg = resolve_config(c);
  const double snr = parse_snr(a.snr);
  std::vector<std::string> methods;
  {
    std::stringstream ss(a.methods);
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) methods.push_back(tok);
  }
  for (const auto& m : methods)
    if (m != "adjoint" && m != "bp" && m != "tv") throw InvalidArgument("unknown bench method '" + m + "'");

  const ObservationOperator sim(cfg, detail::uncached());
  std::map<std::string, std::vector<double>> times;
  std::map<std::string, std::vector<double>> psnrs;
  for (std::size_t i = 0; i < a.n; ++i) {
    SceneSpec spec;
    spec.seed = scene_seed(a.seed, i);
    spec.random_phase = true;
    const SceneRecord rec = generate_scene(cfg.grid, spec);
    const MeasurementVector y =
        add_noise(MeasurementVector{sim.forward(rec.truth.values)}, NoiseSpec{snr, substream_seed(spec.seed, 2)});
    const RealVolume truth = rec.truth.magnitude();
    for (const auto& m : methods) {
      const auto t0 = std::chrono::steady_clock::now();
      RealVolume out;
      if (m == "adjoint") {
        out = adjoint_image(cfg, y).image;
      } else if (m == "bp") {
        out = normalize_by_max(backprojection(cfg, y).magnitude()).image;
      } else {
        out = tv_solve(cfg, y, a.tv).volume.magnitude();
      }
      const auto t1 = std::chrono::steady_clock::now();
      times[m].push_back(std::chrono::duration<double>(t1 - t0).count());
      psnrs[m].push_back(psnr3d(truth, out));
    }
  }
  json result = {{"config_hash", config_hash(cfg)}, {"scenes", a.n}, {"threads", omp_get_max_threads()}, {"methods", json::object()}};
  for (const auto& [m, ts] : times) {
    double mean = 0.0;
    for (double t : ts) mean += t;
    mean /= static_cast<double>(ts.size());
    double var = 0.0;
    for (double t : ts) var += (t - mean) * (t - mean);
    double mean_psnr = 0.0;
    for (double p : psnrs[m]) mean_psnr += p;
    mean_psnr /= static_cast<double>(psnrs[m].size());
    result["methods"][m] = {{"mean_runtime_s", mean},
                            {"std_runtime_s", ts.size() > 1 ? std::sqrt(var / static_cast<double>(ts.size() - 1)) : 0.0},
                            {"mean_psnr_db", mean_psnr}};
  }
  std::cout << result.dump(2) << '\n';
}

int report(const char* kind, const std::string& message, int code) {
  std::cerr << json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << '\n';
  return code;
}

void add_tv_flags(CLI::App* cmd, TvParams& p, std::optional<double>* eps) {
  cmd->add_option("--lambda", p.lambda, "Regularization weight")->capture_default_str();
  if (eps) cmd->add_option("--eps", *eps, "Smoothing constant (default 1e-6 * max|grad A^H y|^2)");
  cmd->add_option("--outer", p.outer_iters, "Outer (reweighting) iterations")->capture_default_str();
  cmd->add_option("--cg-iters", p.cg_iters, "Conjugate-gradient iterations per outer step")->capture_default_str();
  cmd->add_option("--cg-tol", p.cg_tol, "Relative CG residual tolerance")->capture_default_str();
  cmd->add_option("--objective-tol", p.objective_tol, "Relative objective decrease stopping threshold")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Near-field MIMO radar imaging toolkit"};
  app.require_subcommand(1);
  Common common;
  std::size_t steps = 0;
  app.add_option("--config", common.config_path, "Imaging config JSON (default: reference config)");
  app.add_option("--steps", steps, "Override the number of frequency steps");
  app.add_option("--threads", common.threads, "Worker threads (0 = OpenMP default)");
  app.add_flag("--deterministic", "Accepted for compatibility; all reductions are fixed-order");

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Generate ground-truth scenes");
  c_synth->add_option("--out", synth.out, "Output directory")->required();
  c_synth->add_option("--n", synth.n, "Number of extended-target scenes")->capture_default_str();
  c_synth->add_option("--seed", synth.seed, "Base seed")->capture_default_str();
  c_synth->add_flag("--random-phase", synth.random_phase, "Add uniform random phase per voxel");
  c_synth->add_option("--kind", synth.kind, "extended | ellipsoid | resolution")->capture_default_str();
  c_synth->add_option("--semi-axes", synth.semi_axes_m, "Ellipsoid semi-axes in meters")->expected(3);

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Simulate measurements y = A s + w");
  c_sim->add_option("--scene", sim.scene, "Scene volume file")->required();
  c_sim->add_option("--out", sim.out, "Output measurement file")->required();
  c_sim->add_option("--snr", sim.snr, "Measurement SNR in dB, or inf")->capture_default_str();
  c_sim->add_option("--seed", sim.seed, "Noise seed")->capture_default_str();

  ReconArgs adj;
  auto* c_adj = app.add_subcommand("adjoint", "Adjoint image |A^H y| normalized to [0, 1]");
  c_adj->add_option("--meas", adj.meas, "Measurement file")->required();
  c_adj->add_option("--out", adj.out, "Output volume file")->required();
  c_adj->add_flag("--complex", adj.complex_out, "Write the complex A^H y instead");

  ReconArgs bp;
  auto* c_bp = app.add_subcommand("bp", "Frequency-domain backprojection");
  c_bp->add_option("--meas", bp.meas, "Measurement file")->required();
  c_bp->add_option("--out", bp.out, "Output volume file")->required();

  TvArgs tv;
  auto* c_tv = app.add_subcommand("tv", "TV-regularized least squares");
  c_tv->add_option("--meas", tv.io.meas, "Measurement file")->required();
  c_tv->add_option("--out", tv.io.out, "Output volume file")->required();
  c_tv->add_option("--trace", tv.trace, "Objective trace JSON (default: <out>.trace.json)");
  add_tv_flags(c_tv, tv.params, &tv.eps);

  MetricsArgs met;
  auto* c_met = app.add_subcommand("metrics", "PSNR and slice-averaged SSIM of magnitudes");
  c_met->add_option("--recon", met.recon, "Reconstructed volume")->required();
  c_met->add_option("--truth", met.truth, "Ground-truth volume")->required();
  c_met->add_flag("--normalize", met.normalize, "Scale the reconstruction magnitude to max 1 first");

  CondArgs cond;
  auto* c_cond = app.add_subcommand("condnum", "Condition numbers of point-target submatrices");
  c_cond->add_option("--targets", cond.targets, "2 or 4")->capture_default_str();
  c_cond->add_option("--orientation", cond.orientation, "xy or z")->capture_default_str();
  c_cond->add_option("--sep-cm", cond.sep_cm, "start:stop:step or comma list, cm")->capture_default_str();
  c_cond->add_option("--out", cond.out, "CSV output (default stdout)");

  ExportArgs exp;
  auto* c_exp = app.add_subcommand("export-dataset", "Paired adjoint-image / ground-truth training data");
  c_exp->add_option("--out", exp.out, "Output directory")->required();
  c_exp->add_option("--n-train", exp.n_train)->capture_default_str();
  c_exp->add_option("--n-val", exp.n_val)->capture_default_str();
  c_exp->add_option("--n-test", exp.n_test)->capture_default_str();
  c_exp->add_option("--seed", exp.seed, "Base seed")->capture_default_str();
  c_exp->add_option("--snr", exp.snr, "Measurement SNR in dB, or inf")->capture_default_str();
  c_exp->add_flag("--no-random-phase", exp.no_random_phase, "Keep ground-truth phase at zero");
  c_exp->add_option("--dtype", exp.dtype, "f32 or f64")->capture_default_str();

  BenchArgs bench;
  auto* c_bench = app.add_subcommand("bench", "Average reconstruction runtimes");
  c_bench->add_option("--n", bench.n, "Number of test scenes")->capture_default_str();
  c_bench->add_option("--seed", bench.seed, "Base seed")->capture_default_str();
  c_bench->add_option("--snr", bench.snr, "Measurement SNR in dB, or inf")->capture_default_str();
  c_bench->add_option("--methods", bench.methods, "Comma list of adjoint, bp, tv")->capture_default_str();
  add_tv_flags(c_bench, bench.tv, nullptr);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report("usage", e.what(), kExitUsage);
  }

  if (steps > 0) common.steps = steps;
  if (common.threads > 0) omp_set_num_threads(common.threads);

  try {
    if (*c_synth) run_synth(common, synth);
    else if (*c_sim) run_simulate(common, sim);
    else if (*c_adj) run_adjoint(common, adj);
    else if (*c_bp) run_bp(common, bp);
    else if (*c_tv) run_tv(common, tv);
    else if (*c_met) run_metrics(common, met);
    else if (*c_cond) run_condnum(common, cond);
    else if (*c_exp) run_export(common, exp);
    else if (*c_bench) run_bench(common, bench);
  } catch (const InvalidArgument& e) {
    return report("invalid_argument", e.what(), kExitUsage);
  } catch (const CapacityError& e) {
    return report("capacity", e.what(), kExitUsage);
  } catch (const NumericalFailure& e) {
    return report("numerical_failure", e.what(), kExitNumerical);
  } catch (const UndefinedQuantity& e) {
    return report("undefined_quantity", e.what(), kExitNumerical);
  } catch (const DegenerateGeometry& e) {
    return report("degenerate_geometry", e.what(), kExitNumerical);
  } catch (const FormatError& e) {
    return report("format", e.what(), kExitIo);
  } catch (const IoError& e) {
    return report("io", e.what(), kExitIo);
  } catch (const std::filesystem::filesystem_error& e) {
    return report("io", e.what(), kExitIo);
  } catch (const std::exception& e) {
    return report("internal", e.what(), kExitNumerical);
  }
  return 0;
}
