#include "mcddpm/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "mcddpm/error.hpp"
#include "mcddpm/io.hpp"

namespace mcddpm {

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"seed", "0", "master seed for every random draw"},
      {"image_size", "32", "grid side length (images are square)"},
      {"n_items", "64", "phantoms written by gen-data"},
      {"n_ellipses", "6", "ellipses per phantom"},
      {"phase_cutoff", "0.08", "phase noise low-pass cutoff, cycles per sample"},
      {"acceleration", "4", "full / sampled column ratio"},
      {"center_fraction", "0.08", "fraction of columns in the always-sampled centre block"},
      {"mask_kind", "random", "random | equispaced"},
      {"mask_policy", "fixed", "training masks: fixed | per_item"},
      {"T", "128", "diffusion steps"},
      {"data_scale", "0.25", "rms magnitude of one k-space component of the training data"},
      {"sigma_rule", "posterior", "reverse-step std: posterior | beta"},
      {"arch", "toy", "network preset: linear | toy | small"},
      {"output_domain", "image", "network output domain before masking: image | measurement"},
      {"loss_weighting", "simple", "simple | vlb"},
      {"overfit", "false", "reuse one fixed batch at every step (sanity check)"},
      {"batch_size", "8", "items per training step"},
      {"train_steps", "3000", "total optimizer steps"},
      {"learning_rate", "0.001", "AdamW learning rate"},
      {"weight_decay", "0.01", "AdamW decoupled weight decay"},
      {"adam_beta1", "0.9", "AdamW first-moment decay"},
      {"adam_beta2", "0.999", "AdamW second-moment decay"},
      {"adam_eps", "1e-8", "AdamW epsilon"},
      {"checkpoint_every", "500", "steps between periodic checkpoints (0 = final only)"},
      {"n_samples", "8", "posterior samples per input"},
      {"sampling_steps", "0", "reverse steps after respacing; 0 keeps all T steps"},
      {"input_domain", "image", "sample input file holds: image | kspace"},
      {"data", "", "dataset manifest path"},
      {"mask", "", "mask file path"},
      {"checkpoint", "", "checkpoint path"},
      {"resume", "", "checkpoint to resume training from"},
      {"input", "", "sample input: image or k-space tensor"},
      {"gt", "", "ground-truth image tensor(s), comma separated"},
      {"recon", "", "reconstruction tensor(s), comma separated"},
      {"out", "", "output directory (or file for make-mask)"},
  };
  return keys;
}

namespace {

bool known(const std::string& key) {
  const auto& keys = config_keys();
  return std::any_of(keys.begin(), keys.end(), [&](const ConfigKey& k) { return k.name == key; });
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* what) {
  fail(ErrorKind::InvalidArgument, "config key '" + key + "': '" + value + "' is not " + what);
}

}  // namespace

RunConfig::RunConfig() {
  for (const auto& k : config_keys()) values_[k.name] = k.default_value;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (!known(key)) fail(ErrorKind::InvalidArgument, "unknown config key '" + key + "'");
  values_[key] = value;
}

void RunConfig::merge_text(std::string_view text, const std::string& origin) {
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string s = trim(line);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      fail(ErrorKind::InvalidArgument, origin + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(std::string_view(s).substr(0, eq));
    if (!known(key))
      fail(ErrorKind::InvalidArgument, origin + ":" + std::to_string(lineno) + ": unknown config key '" + key + "'");
    values_[key] = trim(std::string_view(s).substr(eq + 1));
  }
}

RunConfig RunConfig::from_text(std::string_view text, const std::string& origin) {
  RunConfig c;
  c.merge_text(text, origin);
  return c;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return from_text(std::string(bytes.begin(), bytes.end()), path.string());
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) fail(ErrorKind::InvalidArgument, "unknown config key '" + key + "'");
  return it->second;
}

long long RunConfig::get_int(const std::string& key) const {
  const std::string& v = get(key);
  long long out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "an integer");
  return out;
}

std::uint64_t RunConfig::get_u64(const std::string& key) const {
  const std::string& v = get(key);
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "a non-negative integer");
  return out;
}

double RunConfig::get_double(const std::string& key) const {
  const std::string& v = get(key);
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out)) bad_value(key, v, "a finite number");
  return out;
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto& k : config_keys()) out += k.name + " = " + values_.at(k.name) + "\n";
  return out;
}

void RunConfig::echo(const std::filesystem::path& dir, const std::string& command) const {
  const std::string text = to_text();
  write_file_bytes(dir / (command + ".config.txt"), std::vector<std::uint8_t>(text.begin(), text.end()));
}

}  // namespace mcddpm
