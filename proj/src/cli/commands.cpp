#include "tpr/cli.hpp"

#include "tpr/bounds.hpp"
#include "tpr/channels.hpp"
#include "tpr/classify.hpp"
#include "tpr/cnn.hpp"
#include "tpr/dataset.hpp"
#include "tpr/digest.hpp"
#include "tpr/error.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#ifndef TPR_VERSION
#define TPR_VERSION "unknown"
#endif

namespace tpr::cli {
namespace {

constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

struct ChannelArgs {
  std::string kind = "additive";
  double nu_t = kUnset;
  double nu_b = kUnset;
  double tau = kUnset;
  double eps_t = kUnset;
  double eps_b = kUnset;
};

struct OutputArgs {
  std::string out;
  bool record_timing = false;
};

void add_channel_options(CLI::App* sub, ChannelArgs& c) {
  sub->add_option("--kind", c.kind, "additive or thermal (loss for tau < 1, amplifier for tau > 1)")
      ->check(CLI::IsMember({"additive", "thermal"}))
      ->capture_default_str();
  sub->add_option("--nuT", c.nu_t, "target induced noise (additive)");
  sub->add_option("--nuB", c.nu_b, "background induced noise (additive)");
  sub->add_option("--tau", c.tau, "transmissivity or gain (thermal)");
  sub->add_option("--epsT", c.eps_t, "target thermal parameter nbar + 1/2 (thermal)");
  sub->add_option("--epsB", c.eps_b, "background thermal parameter nbar + 1/2 (thermal)");
}

void add_output_options(CLI::App* sub, OutputArgs& o) {
  sub->add_option("--out", o.out, "CSV path; a <out>.manifest sidecar is written next to it");
  sub->add_flag("--record-timing", o.record_timing, "add wall time to the manifest");
}

EnvironmentPair make_pair(const ChannelArgs& c) {
  auto need = [](double v, const char* flag) {
    if (std::isnan(v)) throw Error(ErrorKind::DomainError, std::string("missing ") + flag);
    return v;
  };
  if (c.kind == "additive") return EnvironmentPair::additive(need(c.nu_b, "--nuB"), need(c.nu_t, "--nuT"));
  return EnvironmentPair::thermal(need(c.tau, "--tau"), need(c.eps_b, "--epsB"), need(c.eps_t, "--epsT"));
}

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string s;
  for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? std::string(1, sep) : "") + parts[i];
  return s;
}

void record_params(const CLI::App* sub, Manifest& m) {
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || name == "config") continue;
    std::string value;
    if (opt->get_expected_max() == 0) {
      value = opt->count() > 0 ? "true" : "false";
    } else if (opt->count() > 0) {
      value = join(opt->results(), ',');
    } else {
      value = opt->get_default_str();
    }
    m.set("param." + name, value);
  }
}

void record_closed_forms(Manifest& m) {
  for (const auto& e : closed_form::audit()) m.set("closed_form." + e.name, e.enabled ? "enabled" : "disabled");
}

// Writes the CSV (and manifest when --out is given).
void emit(const std::string& csv, Manifest& manifest, const OutputArgs& o, std::ostream& out,
          std::chrono::steady_clock::time_point start) {
  manifest.set("version", TPR_VERSION);
  manifest.set("output.sha256", sha256_hex(csv));
  if (o.record_timing) {
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
    manifest.set("wall_time_s", format_double(dt.count()));
  }
  if (o.out.empty()) {
    out << csv;
    return;
  }
  std::ofstream f(o.out, std::ios::binary | std::ios::trunc);
  if (!f.write(csv.data(), static_cast<std::streamsize>(csv.size()))) {
    throw Error(ErrorKind::IoError, "cannot write " + o.out);
  }
  const std::string text = manifest.render();
  std::ofstream mf(o.out + ".manifest", std::ios::binary | std::ios::trunc);
  if (!mf.write(text.data(), static_cast<std::streamsize>(text.size()))) {
    throw Error(ErrorKind::IoError, "cannot write " + o.out + ".manifest");
  }
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::BadMagic:
    case ErrorKind::TruncatedPayload:
    case ErrorKind::DimensionOverflow:
    case ErrorKind::IoError:
    case ErrorKind::EmptyTrainingSet:
    case ErrorKind::EmptyEvaluationSet: return kData;
    case ErrorKind::NonFiniteLoss:
    case ErrorKind::SingularDesign:
    case ErrorKind::InsufficientSamples:
    case ErrorKind::ConventionUnresolved: return kNonConvergence;
    default: return kUsage;
  }
}

// ---------------------------------------------------------------- fidelity

struct FidelityArgs {
  ChannelArgs channel;
  OutputArgs output;
  std::vector<double> a{0.5, 1.0, 2.5, 10.0, 100.0};
};

int cmd_fidelity(const CLI::App* sub, const FidelityArgs& args, std::ostream& out, std::ostream& err,
                 std::chrono::steady_clock::time_point start, const Manifest& base) {
  const EnvironmentPair pair = make_pair(args.channel);
  std::vector<double> grid = args.a;
  grid.push_back(0.5);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  std::ostringstream csv;
  csv << "a,F\n";
  for (double a : grid) csv << format_double(a) << ',' << format_double(fidelity_finite(pair, a)) << '\n';
  const auto inf = fidelity_choi_inf(pair);
  csv << "inf," << format_double(inf.value) << '\n';

  Manifest m = base;
  m.set("command", "fidelity");
  record_params(sub, m);
  record_closed_forms(m);
  m.set("result.inf_source", inf.source == FidelitySource::ClosedForm ? "closed_form" : "extrapolated");
  m.set("result.extrapolation_converged", inf.oracle.energies.empty() ? "n/a" : (inf.oracle.converged ? "true" : "false"));
  m.set("result.convention_unresolved", inf.convention_unresolved ? "true" : "false");
  emit(csv.str(), m, args.output, out, start);

  if (inf.convention_unresolved) {
    err << "warning: closed form disagrees with the extrapolated value; reporting the extrapolation\n";
  }
  if (inf.source == FidelitySource::Extrapolated && !inf.oracle.converged) {
    err << "error: infinite-squeezing extrapolation did not converge (last change "
        << format_double(inf.oracle.last_change) << ")\n";
    return kNonConvergence;
  }
  return kOk;
}

// ---------------------------------------------------------------- bounds

struct BoundsArgs {
  ChannelArgs channel;
  OutputArgs output;
  std::string space = "uniform";
  int m = 0;
  std::vector<int> k;
  std::vector<std::int64_t> copies;
  std::int64_t m_max = 200;
  std::int64_t m_step = 1;
  std::string energy = "asymptotic";
  double a = 10.0;
};

int cmd_bounds(const CLI::App* sub, const BoundsArgs& args, std::ostream& out, std::ostream& err,
               std::chrono::steady_clock::time_point start, const Manifest& base) {
  const EnvironmentPair pair = make_pair(args.channel);
  ImageSpaceSpec space = ImageSpaceSpec::uniform(std::max(args.m, 1));
  if (args.m < 1) throw Error(ErrorKind::DomainError, "--m must be >= 1");
  if (args.space == "cpf") {
    if (args.k.size() != 1) throw Error(ErrorKind::DomainError, "cpf needs exactly one --k");
    space = ImageSpaceSpec::cpf(args.m, args.k.front());
  } else if (args.space == "bcpf") {
    space = ImageSpaceSpec::bcpf(args.m, args.k);
  }

  std::vector<std::int64_t> grid = args.copies;
  if (grid.empty()) {
    if (args.m_max < 1 || args.m_step < 1) throw Error(ErrorKind::DomainError, "--M-max and --M-step must be >= 1");
    for (std::int64_t M = 1; M <= args.m_max; M += args.m_step) grid.push_back(M);
  }
  for (auto M : grid) {
    if (M < 1) throw Error(ErrorKind::DomainError, "copy numbers must be >= 1");
  }

  ProbeSpec probe;
  probe.energy = args.energy == "classical" ? ProbeSpec::Energy::Classical
                 : args.energy == "finite"  ? ProbeSpec::Energy::Finite
                                            : ProbeSpec::Energy::Asymptotic;
  probe.a = args.a;
  const double f_q = probe_fidelity(pair, probe);
  const double f_cl = fidelity_classical(pair);

  std::ostringstream csv;
  csv << "M,q_lower,q_upper,cl_lower,mga,mpa\n";
  std::set<std::string> warnings;
  std::optional<std::int64_t> first;
  double mbar = std::numeric_limits<double>::infinity();
  for (std::int64_t M : grid) {
    const BoundReport r = bounds(space, M, f_q, f_cl);
    mbar = r.mbar_adv;
    warnings.insert(r.warnings.begin(), r.warnings.end());
    if (r.mga >= 0.0) {
      if (!first) first = M;
    } else {
      first.reset();
    }
    csv << M << ',' << format_double(r.q_lower) << ',' << format_double(r.q_upper) << ','
        << format_double(r.cl_lower) << ',' << format_double(r.mga) << ',' << format_double(r.mpa) << '\n';
  }
  csv << "# mbar_adv=" << format_double(mbar) << " first_guaranteed_M=" << (first ? std::to_string(*first) : "none")
      << " F_q=" << format_double(f_q) << " F_cl=" << format_double(f_cl) << '\n';

  Manifest m = base;
  m.set("command", "bounds");
  m.set("space", space.describe());
  record_params(sub, m);
  record_closed_forms(m);
  emit(csv.str(), m, args.output, out, start);
  for (const auto& w : warnings) err << "warning: " << w << '\n';
  return kOk;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  ChannelArgs channel;
  OutputArgs output;
  std::string classifier = "nn";
  std::vector<std::int64_t> copies;
  std::size_t train_size = 10000;
  std::size_t eval_size = 1000;
  int trials = 20;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  int threshold = 128;
  std::string data;
  double p_override = kUnset;
  bool eval_from_train = false;
  int epochs = 5;
  double learning_rate = 0.05;
  int batch = 32;
  bool clean_train = false;
  std::string save_checkpoint;
};

int cmd_simulate(const CLI::App* sub, const SimulateArgs& args, std::ostream& out, std::ostream&,
                 std::chrono::steady_clock::time_point start, const Manifest& base) {
  const EnvironmentPair pair = make_pair(args.channel);
  if (args.copies.empty()) throw Error(ErrorKind::DomainError, "--M needs at least one value");
  if (!std::isnan(args.p_override) && !(args.p_override >= 0.0 && args.p_override <= 0.5)) {
    throw Error(ErrorKind::DomainError, "--p-override must lie in [0, 1/2]");
  }
  const std::filesystem::path dir = args.data.empty() ? default_mnist_dir() : std::filesystem::path(args.data);
  if (dir.empty()) throw Error(ErrorKind::IoError, "no dataset directory: pass --data or set TPR_MNIST_DIR");
  const MnistData mnist = load_mnist(dir, static_cast<std::uint8_t>(args.threshold));

  if (args.train_size < 1 || args.train_size > mnist.train.size()) {
    throw Error(ErrorKind::DomainError, "--T must lie in [1, " + std::to_string(mnist.train.size()) + "]");
  }
  const BinaryImageDataset training = mnist.train.slice(0, args.train_size, BinaryImageDataset::Split::Training);
  const BinaryImageDataset evaluation =
      args.eval_from_train ? training.slice(0, std::min(args.eval_size, training.size()),
                                            BinaryImageDataset::Split::Evaluation)
                           : mnist.test.balanced_prefix(args.eval_size, BinaryImageDataset::Split::Evaluation);

  const double f_q = fidelity_choi_inf(pair).value;
  const double f_cl = fidelity_classical(pair);
  auto resolve = [&](const NoiseModel& n) { return std::isnan(args.p_override) ? n : NoiseModel::fixed(args.p_override); };

  const NetworkSpec net = NetworkSpec::mnist_default();
  TrainConfig cfg;
  cfg.learning_rate = args.learning_rate;
  cfg.batch_size = args.batch;
  cfg.epochs = args.epochs;
  cfg.seed = args.seed;
  cfg.noisy_train = !args.clean_train;
  std::map<double, Parameters> trained;  // by training flip probability
  auto network_for = [&](double p) -> const Parameters& {
    const double key = cfg.noisy_train ? p : 0.0;
    auto it = trained.find(key);
    if (it == trained.end()) it = trained.emplace(key, train(net, training, NoiseModel::fixed(key), cfg).params).first;
    return it->second;
  };

  const ErrorEstimator estimator = [&](const NoiseModel& model) {
    const NoiseModel noise = resolve(model);
    if (args.classifier == "cnn") {
      return evaluate(net, network_for(noise.p), evaluation, noise, args.trials, args.seed, args.threads);
    }
    return estimate_error(training, evaluation, noise, args.trials, args.seed, args.threads);
  };
  auto rows = advantage_regions(estimator, f_q, f_cl, args.copies);

  std::ostringstream csv;
  csv << "M,p_cl_low,p_cl_up,p_q_low,p_q_up,E_cl_L,E_cl_U,E_q_L,E_q_U,dE_min,dE_max,stderr_max\n";
  for (auto& r : rows) {
    if (!std::isnan(args.p_override)) r.p_cl_low = r.p_cl_up = r.p_q_low = r.p_q_up = args.p_override;
    csv << r.M;
    for (double v : {r.p_cl_low, r.p_cl_up, r.p_q_low, r.p_q_up, r.e_cl_lower, r.e_cl_upper, r.e_q_lower,
                     r.e_q_upper, r.de_min, r.de_max, r.stderr_max}) {
      csv << ',' << format_double(v);
    }
    csv << '\n';
  }

  if (args.classifier == "cnn" && !args.save_checkpoint.empty() && !trained.empty()) {
    save_checkpoint(args.save_checkpoint, net, trained.begin()->second);
  }

  Manifest m = base;
  m.set("command", "simulate");
  record_params(sub, m);
  record_closed_forms(m);
  m.set("input.directory", dir.string());
  m.set("input.train_images.sha256", mnist.train.provenance.images_sha256);
  m.set("input.train_labels.sha256", mnist.train.provenance.labels_sha256);
  m.set("input.test_images.sha256", mnist.test.provenance.images_sha256);
  m.set("input.test_labels.sha256", mnist.test.provenance.labels_sha256);
  m.set("fidelity.quantum", format_double(f_q));
  m.set("fidelity.classical", format_double(f_cl));
  m.set("noise_model", "independent symmetric pixel flips");
  m.set("distance", "hamming");
  if (args.classifier == "cnn") {
    m.set("network", net.describe());
    m.set("network.training_noise", cfg.noisy_train ? "fresh per epoch" : "clean");
  }
  emit(csv.str(), m, args.output, out, start);
  return kOk;
}

// ---------------------------------------------------------------- temp

struct TempArgs {
  OutputArgs output;
  double lambda = 1e-3;
  std::vector<double> nbar;
  std::vector<double> eps;
};

int cmd_temp(const CLI::App* sub, const TempArgs& args, std::ostream& out, std::ostream&,
             std::chrono::steady_clock::time_point start, const Manifest& base) {
  std::vector<double> values = args.nbar;
  for (double e : args.eps) values.push_back(e - 0.5);
  if (values.empty()) throw Error(ErrorKind::DomainError, "give --nbar or --eps values");
  std::ostringstream csv;
  csv << "nbar,T_K,T_C\n";
  for (double n : values) {
    const double t = temperature_of(n, args.lambda);
    csv << format_double(n) << ',' << format_double(t) << ',' << format_double(t - 273.15) << '\n';
  }
  Manifest m = base;
  m.set("command", "temp");
  m.set("constants", "CODATA 2018 exact h, c, k");
  record_params(sub, m);
  emit(csv.str(), m, args.output, out, start);
  return kOk;
}

// Expands --config into flags placed ahead of the user's own flags; keys the
// user passes explicitly are dropped from the config.
std::vector<std::string> expand_config(const std::vector<std::string>& args, std::string& config_digest) {
  std::vector<std::string> rest;
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw CLI::ArgumentMismatch("--config needs a path");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (path.empty() || rest.empty()) return rest;
  const std::string text = read_file(path);
  config_digest = sha256_hex(text);
  std::set<std::string> given;
  for (const auto& a : rest) {
    if (a.rfind("--", 0) == 0) given.insert(a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2));
  }
  std::vector<std::string> merged{rest.front()};
  for (const auto& flag : config_to_flags(text)) {
    const std::string key = flag.substr(2, flag.find('=') - 2);
    if (!given.count(key)) merged.push_back(flag);
  }
  merged.insert(merged.end(), rest.begin() + 1, rest.end());
  return merged;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  CLI::App app{"Bounds and simulations for thermal-image channel pattern recognition", "tpr"};
  app.set_version_flag("--version", TPR_VERSION);
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  FidelityArgs fid;
  auto* s_fid = app.add_subcommand("fidelity", "finite-energy Choi fidelities and their limits");
  add_channel_options(s_fid, fid.channel);
  s_fid->add_option("--a", fid.a, "TMSV variances (a = nbar_S + 1/2); 0.5 is always included")->delimiter(',');
  add_output_options(s_fid, fid.output);

  BoundsArgs bnd;
  auto* s_bnd = app.add_subcommand("bounds", "error-probability bounds and advantage per copy number");
  add_channel_options(s_bnd, bnd.channel);
  s_bnd->add_option("--space", bnd.space)->check(CLI::IsMember({"uniform", "cpf", "bcpf"}));
  s_bnd->add_option("--m", bnd.m, "pixel count")->required();
  s_bnd->add_option("--k", bnd.k, "target count (cpf) or target-count set (bcpf)")->delimiter(',');
  s_bnd->add_option("--M", bnd.copies, "copy numbers; default 1..M-max")->delimiter(',');
  s_bnd->add_option("--M-max", bnd.m_max);
  s_bnd->add_option("--M-step", bnd.m_step);
  s_bnd->add_option("--energy", bnd.energy, "quantum probe regime")
      ->check(CLI::IsMember({"asymptotic", "finite", "classical"}));
  s_bnd->add_option("--a", bnd.a, "TMSV variance for --energy finite");
  add_output_options(s_bnd, bnd.output);

  SimulateArgs sim;
  auto* s_sim = app.add_subcommand("simulate", "classifier error under bound-derived pixel noise (MNIST)");
  add_channel_options(s_sim, sim.channel);
  s_sim->add_option("--classifier", sim.classifier)->check(CLI::IsMember({"nn", "cnn"}));
  s_sim->add_option("--M", sim.copies, "copy numbers")->delimiter(',')->required();
  s_sim->add_option("--T", sim.train_size, "training images (prefix of the MNIST training file)");
  s_sim->add_option("--eval-size", sim.eval_size, "class-balanced evaluation images");
  s_sim->add_option("--trials", sim.trials, "noisy samples per evaluation image");
  s_sim->add_option("--seed", sim.seed);
  s_sim->add_option("--threads", sim.threads, "0 = all cores; output does not depend on it");
  s_sim->add_option("--threshold", sim.threshold, "binarization threshold")->check(CLI::Range(1, 255));
  s_sim->add_option("--data", sim.data, "MNIST directory (default: $TPR_MNIST_DIR)");
  s_sim->add_option("--p-override", sim.p_override, "use this flip probability for every endpoint");
  s_sim->add_flag("--eval-from-train", sim.eval_from_train, "evaluate on the first training images");
  s_sim->add_option("--epochs", sim.epochs, "CNN epochs");
  s_sim->add_option("--lr", sim.learning_rate, "CNN learning rate");
  s_sim->add_option("--batch", sim.batch, "CNN batch size");
  s_sim->add_flag("--clean-train", sim.clean_train, "train the CNN without pixel noise");
  s_sim->add_option("--save-checkpoint", sim.save_checkpoint, "write the first trained CNN here");
  add_output_options(s_sim, sim.output);

  TempArgs tmp;
  auto* s_tmp = app.add_subcommand("temp", "mode temperature for mean photon numbers");
  s_tmp->add_option("--lambda", tmp.lambda, "wavelength in metres");
  s_tmp->add_option("--nbar", tmp.nbar)->delimiter(',');
  s_tmp->add_option("--eps", tmp.eps, "thermal parameters nbar + 1/2")->delimiter(',');
  add_output_options(s_tmp, tmp.output);

  try {
    std::string config_digest;
    std::vector<std::string> args = expand_config(raw_args, config_digest);
    std::reverse(args.begin(), args.end());
    app.parse(args);
    Manifest base;
    if (!config_digest.empty()) base.set("config.sha256", config_digest);
    if (s_fid->parsed()) return cmd_fidelity(s_fid, fid, out, err, start, base);
    if (s_bnd->parsed()) return cmd_bounds(s_bnd, bnd, out, err, start, base);
    if (s_sim->parsed()) return cmd_simulate(s_sim, sim, out, err, start, base);
    if (s_tmp->parsed()) return cmd_temp(s_tmp, tmp, out, err, start, base);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  }
  return kUsage;
}

}  // namespace tpr::cli
