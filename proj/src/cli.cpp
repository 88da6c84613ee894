#include "mcddpm/cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "mcddpm/checkpoint.hpp"
#include "mcddpm/datagen.hpp"
#include "mcddpm/diffusion.hpp"
#include "mcddpm/evalkit.hpp"
#include "mcddpm/io.hpp"
#include "mcddpm/measurement.hpp"
#include "mcddpm/training.hpp"

namespace mcddpm::cli {

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io:
    case ErrorKind::BadMagic:
    case ErrorKind::UnsupportedVersion:
    case ErrorKind::Truncated:
    case ErrorKind::Format:
    case ErrorKind::Integrity:
      return 2;
    case ErrorKind::NumericalFailure:
    case ErrorKind::InvariantViolation:
      return 3;
    default:
      return 1;
  }
}

namespace {

namespace fs = std::filesystem;

const std::string& need_path(const RunConfig& c, const std::string& key, const char* command) {
  const std::string& v = c.get(key);
  if (v.empty()) fail(ErrorKind::InvalidArgument, std::string(command) + ": missing required '" + key + "'");
  return v;
}

fs::path make_out_dir(const RunConfig& c, const char* command) {
  const fs::path dir = need_path(c, "out", command);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::Io, "cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

int positive_int(const RunConfig& c, const std::string& key, long long min = 1) {
  const long long v = c.get_int(key);
  if (v < min || v > 1'000'000'000)
    fail(ErrorKind::InvalidArgument, "config key '" + key + "' must be at least " + std::to_string(min));
  return int(v);
}

bool get_bool(const RunConfig& c, const std::string& key) {
  const std::string& v = c.get(key);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  fail(ErrorKind::InvalidArgument, "config key '" + key + "' must be true or false");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

Mask build_mask(const RunConfig& c) {
  const int width = positive_int(c, "image_size");
  const double accel = c.get_double("acceleration");
  const double cf = c.get_double("center_fraction");
  const std::string& kind = c.get("mask_kind");
  if (kind == "random") {
    RngStream rng(c.get_u64("seed"), 0);
    return make_random_mask(width, accel, cf, rng);
  }
  if (kind == "equispaced") return make_equispaced_mask(width, accel, cf);
  fail(ErrorKind::InvalidArgument, "unknown mask_kind '" + kind + "' (random|equispaced)");
}

ArchConfig arch_of(const RunConfig& c) {
  const int n = positive_int(c, "image_size");
  ArchConfig a = ArchConfig::preset(c.get("arch"), n, n);
  a.output_domain = parse_output_domain(c.get("output_domain"));
  a.steps = positive_int(c, "T");
  a.data_scale = c.get_double("data_scale");
  a.validate();
  return a;
}

LossWeighting parse_weighting(const std::string& s) {
  if (s == "simple") return LossWeighting::Simple;
  if (s == "vlb") return LossWeighting::Vlb;
  fail(ErrorKind::InvalidArgument, "unknown loss_weighting '" + s + "' (simple|vlb)");
}

// Complex or real image tensor, promoted to complex.
ComplexGrid read_image(const fs::path& path) {
  const RawTensor raw = read_raw_tensor(path);
  if (raw.dtype == DType::F32Complex) return read_tensor(path);
  if (raw.dtype == DType::F32Real) {
    const RealGrid r = read_real_tensor(path);
    ComplexGrid g(r.height, r.width);
    for (std::size_t i = 0; i < r.size(); ++i) g[i] = r.data[i];
    return g;
  }
  fail(ErrorKind::Format, "'" + path.string() + "' does not hold an image");
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

void cmd_gen_data(const RunConfig& c, std::ostream& out) {
  PhantomConfig p;
  p.size = positive_int(c, "image_size");
  p.n_ellipses = positive_int(c, "n_ellipses");
  p.phase_cutoff = c.get_double("phase_cutoff");
  p.seed = c.get_u64("seed");
  const int n = positive_int(c, "n_items");
  const fs::path dir = make_out_dir(c, "gen-data");
  const Manifest m = build_dataset(n, p, dir);
  c.echo(dir, "gen-data");
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(m.checksum));
  out << "wrote " << m.paths.size() << " items to " << dir.string() << "\nchecksum " << hex << "\n";
}

void cmd_make_mask(const RunConfig& c, std::ostream& out) {
  const fs::path path = need_path(c, "out", "make-mask");
  const Mask mask = build_mask(c);
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::Io, "cannot create '" + dir.string() + "': " + ec.message());
  write_mask(path, mask);
  c.echo(dir, "make-mask");
  out << "sampled " << mask.sampled_count() << "/" << mask.width() << " columns\n";
}

void cmd_train(const RunConfig& c, std::ostream& out) {
  TrainConfig tc;
  tc.arch = arch_of(c);
  tc.steps_T = positive_int(c, "T");
  tc.sigma_rule = parse_sigma_rule(c.get("sigma_rule"));
  tc.adam.learning_rate = c.get_double("learning_rate");
  tc.adam.weight_decay = c.get_double("weight_decay");
  tc.adam.beta1 = c.get_double("adam_beta1");
  tc.adam.beta2 = c.get_double("adam_beta2");
  tc.adam.eps = c.get_double("adam_eps");
  tc.batch_size = positive_int(c, "batch_size");
  tc.train_steps = positive_int(c, "train_steps", 0);
  tc.mask_policy = parse_mask_policy(c.get("mask_policy"));
  tc.acceleration = c.get_double("acceleration");
  tc.center_fraction = c.get_double("center_fraction");
  tc.weighting = parse_weighting(c.get("loss_weighting"));
  tc.seed = c.get_u64("seed");
  tc.overfit = get_bool(c, "overfit");
  const int every = positive_int(c, "checkpoint_every", 0);

  const auto dataset = load_dataset(need_path(c, "data", "train"));
  std::optional<Mask> mask;
  if (tc.mask_policy == MaskPolicy::Fixed) mask = read_mask(need_path(c, "mask", "train"));
  const std::string& resume = c.get("resume");
  Checkpoint state = resume.empty() ? init_training(tc) : read_checkpoint(resume, tc.arch);
  if (!resume.empty() && state.step > std::uint64_t(tc.train_steps))
    fail(ErrorKind::InvalidArgument, "train: resume checkpoint is already past train_steps");

  const fs::path dir = make_out_dir(c, "train");
  c.echo(dir, "train");
  std::ofstream log(dir / "loss.txt", resume.empty() ? std::ios::trunc : std::ios::app);
  if (!log) fail(ErrorKind::Io, "cannot open loss log in '" + dir.string() + "'");
  train(state, dataset, mask, tc, [&](std::uint64_t step, double loss, const Checkpoint& s) {
    log << step << " " << fmt("%.17g", loss) << "\n";
    if (every > 0 && step % std::uint64_t(every) == 0) {
      log.flush();
      write_checkpoint(dir / ("checkpoint_" + std::to_string(step) + ".mcdk"), s);
    }
  });
  log.flush();
  if (!log) fail(ErrorKind::Io, "write failed on loss log");
  write_checkpoint(dir / "checkpoint.mcdk", state);
  out << "trained to step " << state.step << "; checkpoint " << (dir / "checkpoint.mcdk").string() << "\n";
}

void cmd_sample(const RunConfig& c, std::ostream& out) {
  const Checkpoint ckpt = read_checkpoint(need_path(c, "checkpoint", "sample"));
  const Mask mask = read_mask(need_path(c, "mask", "sample"));
  const ComplexGrid input = read_tensor(need_path(c, "input", "sample"));
  const std::string& domain = c.get("input_domain");
  PartialKSpace y_m = PartialKSpace::zeros(input.height(), mask, Side::Sampled);
  if (domain == "image") {
    y_m = split(input, mask).first;
  } else if (domain == "kspace") {
    require(input.width() == mask.width(), ErrorKind::ShapeMismatch, "sample: k-space width differs from the mask");
    y_m = PartialKSpace(input, mask, Side::Sampled);
  } else {
    fail(ErrorKind::InvalidArgument, "unknown input_domain '" + domain + "' (image|kspace)");
  }

  DiffusionSchedule schedule = build_cosine_halved(ckpt.schedule_steps, ckpt.sigma_rule);
  const int k = positive_int(c, "sampling_steps", 0);
  if (k != 0 && k != schedule.steps()) schedule = respace(schedule, k);

  SampleOptions opts;
  opts.n_samples = positive_int(c, "n_samples");
  opts.seed = c.get_u64("seed");
  const NetworkPredictor net(ckpt.params);
  const auto samples = sample(net, y_m, schedule, opts);
  for (const auto& x : samples) {
    const double dc = data_consistency_error(x, y_m);
    if (!(dc <= 1e-10))
      fail(ErrorKind::InvariantViolation, "sample: data consistency violated (" + fmt("%.3e", dc) + ")");
  }

  const fs::path dir = make_out_dir(c, "sample");
  c.echo(dir, "sample");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "sample_%03zu.mcdt", i);
    write_tensor(dir / name, samples[i]);
  }
  const UncertaintyMap u = sample_stats(samples);
  write_real_tensor(dir / "mean.mcdt", u.mean);
  write_real_tensor(dir / "std.mcdt", u.std);
  write_real_tensor(dir / "zf.mcdt", magnitude(idft2(y_m.grid())));
  out << "wrote " << samples.size() << " samples (" << schedule.steps() << " steps) to " << dir.string() << "\n";
}

void cmd_eval(const RunConfig& c, std::ostream& out) {
  const auto gt_paths = split_list(need_path(c, "gt", "eval"));
  const auto recon_paths = split_list(c.get("recon"));
  const std::string& mask_path = c.get("mask");
  if (recon_paths.empty() && mask_path.empty())
    fail(ErrorKind::InvalidArgument, "eval: give 'recon' and/or 'mask' (for the zero-filled baseline)");
  if (!recon_paths.empty() && recon_paths.size() != gt_paths.size())
    fail(ErrorKind::InvalidArgument, "eval: 'recon' and 'gt' list different numbers of files");

  std::vector<ComplexGrid> gt_complex;
  std::vector<RealGrid> gt;
  for (const auto& p : gt_paths) {
    gt_complex.push_back(read_image(p));
    gt.push_back(magnitude(gt_complex.back()));
  }
  std::map<std::string, std::vector<RealGrid>> methods;
  if (!mask_path.empty()) {
    const Mask mask = read_mask(mask_path);
    for (const auto& x : gt_complex) methods["zf"].push_back(magnitude(idft2(split(x, mask).first.grid())));
  }
  for (const auto& p : recon_paths) methods["recon"].push_back(magnitude(read_image(p)));

  const fs::path dir = make_out_dir(c, "eval");
  c.echo(dir, "eval");
  std::string report;
  for (const auto& [name, recon] : methods) {
    std::string csv = csv_header() + "\n";
    for (std::size_t i = 0; i < recon.size(); ++i) csv += to_csv_row(metrics(recon[i], gt[i])) + "\n";
    write_file_bytes(dir / ("metrics_" + name + ".csv"), std::vector<std::uint8_t>(csv.begin(), csv.end()));
    if (recon.size() == 1) {
      report += to_key_value(metrics(recon[0], gt[0]), name + ".");
    } else {
      const VolumeReport v = volume_metrics(recon, gt);
      report += to_key_value(v.slice_mean, name + ".slice_mean.");
      report += to_key_value(v.volume, name + ".volume.");
    }
  }
  write_file_bytes(dir / "metrics.txt", std::vector<std::uint8_t>(report.begin(), report.end()));
  out << report;
}

void cmd_schedule_info(const RunConfig& c, std::ostream& out) {
  DiffusionSchedule s = build_cosine_halved(positive_int(c, "T"), parse_sigma_rule(c.get("sigma_rule")));
  const int k = positive_int(c, "sampling_steps", 0);
  if (k != 0 && k != s.steps()) s = respace(s, k);
  std::string table = "t alpha beta bar_alpha bar_beta tilde_beta sigma model_t\n";
  for (int t = 1; t <= s.steps(); ++t) {
    table += std::to_string(t);
    for (double v : {s.alpha(t), s.beta(t), s.bar_alpha(t), s.bar_beta(t), s.tilde_beta(t), s.sigma(t)})
      table += " " + fmt("%.10e", v);
    table += " " + std::to_string(s.model_timestep(t)) + "\n";
  }
  out << table;
  if (!c.get("out").empty()) {
    const fs::path dir = make_out_dir(c, "schedule-info");
    c.echo(dir, "schedule-info");
    write_file_bytes(dir / "schedule.txt", std::vector<std::uint8_t>(table.begin(), table.end()));
  }
}

namespace {

using Command = void (*)(const RunConfig&, std::ostream&);

struct Subcommand {
  const char* name;
  const char* help;
  Command fn;
  std::vector<std::string> keys;
};

const std::vector<Subcommand>& subcommands() {
  static const std::vector<Subcommand> cmds = {
      {"gen-data", "write a synthetic phantom dataset", cmd_gen_data,
       {"n_items", "image_size", "n_ellipses", "phase_cutoff", "seed", "out"}},
      {"make-mask", "write an under-sampling mask", cmd_make_mask,
       {"image_size", "acceleration", "center_fraction", "mask_kind", "seed", "out"}},
      {"train", "train the noise predictor", cmd_train,
       {"data", "mask", "resume", "out", "seed", "image_size", "T", "sigma_rule", "arch", "output_domain", "data_scale",
        "loss_weighting", "batch_size", "train_steps", "learning_rate", "weight_decay", "adam_beta1", "adam_beta2",
        "adam_eps", "checkpoint_every", "overfit", "mask_policy", "acceleration", "center_fraction"}},
      {"sample", "draw posterior samples for one acquisition", cmd_sample,
       {"checkpoint", "mask", "input", "input_domain", "n_samples", "sampling_steps", "seed", "out"}},
      {"eval", "score reconstructions against ground truth", cmd_eval, {"gt", "recon", "mask", "out"}},
      {"schedule-info", "print the noise schedule", cmd_schedule_info, {"T", "sigma_rule", "sampling_steps", "out"}},
  };
  return cmds;
}

const std::map<std::string, std::string>& aliases() {
  static const std::map<std::string, std::string> a = {
      {"n", "n_items"},           {"size", "image_size"}, {"width", "image_size"},   {"accel", "acceleration"},
      {"cf", "center_fraction"},  {"respace", "sampling_steps"}, {"steps", "train_steps"}, {"lr", "learning_rate"},
  };
  return a;
}

std::string flag_of(std::string key) {
  for (auto& ch : key)
    if (ch == '_') ch = '-';
  return "--" + key;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Measurement-conditioned diffusion for under-sampled MRI reconstruction", "mcddpm"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "show help for every subcommand");

  struct Parsed {
    std::string config_file;
    std::vector<std::string> sets;
    std::map<std::string, std::string> flags;
  };
  std::map<std::string, Parsed> parsed;
  for (const auto& cmd : subcommands()) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    Parsed& p = parsed[cmd.name];
    sub->add_option("--config", p.config_file, "key = value config file");
    sub->add_option("--set", p.sets, "override a config key (key=value)");
    for (const auto& key : cmd.keys) {
      std::string names = flag_of(key);
      for (const auto& [alias, target] : aliases())
        if (target == key) names += ",--" + alias;
      std::string doc;
      for (const auto& k : config_keys())
        if (k.name == key) doc = k.doc + " (default: " + (k.default_value.empty() ? "none" : k.default_value) + ")";
      sub->add_option_function<std::string>(
          names, [&p, key](const std::string& v) { p.flags[key] = v; }, doc)
          ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    }
  }

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    for (const auto* sub : app.get_subcommands())
      if (sub->parsed()) {
        out << sub->help();
        return 0;
      }
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  for (const auto& cmd : subcommands()) {
    CLI::App* sub = app.get_subcommand(cmd.name);
    if (!sub->parsed()) continue;
    const Parsed& p = parsed[cmd.name];
    try {
      RunConfig config = p.config_file.empty() ? RunConfig() : RunConfig::from_file(p.config_file);
      for (const auto& kv : p.sets) config.merge_text(kv, "--set");
      for (const auto& [key, value] : p.flags) config.set(key, value);
      cmd.fn(config, out);
      return 0;
    } catch (const Error& e) {
      err << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
      return exit_code(e.kind());
    } catch (const std::exception& e) {
      err << "internal error: " << e.what() << "\n";
      return 3;
    }
  }
  return 1;
}

}  // namespace mcddpm::cli
