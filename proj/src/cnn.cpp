#include "tpr/cnn.hpp"

#include "tpr/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace tpr {
namespace {

struct Layer {
  bool conv = false;
  bool relu = true;
  // conv geometry (dense layers use in_c = in size, out_c = out size, h = w = 1)
  int in_c = 1, in_h = 1, in_w = 1;
  int out_c = 1, out_h = 1, out_w = 1;
  int kernel = 1, stride = 1;
  std::size_t weights = 0;  // offset
  std::size_t biases = 0;   // offset

  std::size_t in_size() const { return static_cast<std::size_t>(in_c) * in_h * in_w; }
  std::size_t out_size() const { return static_cast<std::size_t>(out_c) * out_h * out_w; }
  std::size_t weight_count() const {
    return conv ? static_cast<std::size_t>(out_c) * in_c * kernel * kernel : out_size() * in_size();
  }
};

struct Plan {
  std::vector<Layer> layers;
  std::size_t parameters = 0;
};

Plan make_plan(const NetworkSpec& net) {
  net.validate();
  Plan plan;
  int c = 1, h = net.height, w = net.width;
  auto place = [&plan](Layer& l) {
    l.weights = plan.parameters;
    l.biases = l.weights + l.weight_count();
    plan.parameters = l.biases + static_cast<std::size_t>(l.out_c);
  };
  for (const auto& spec : net.conv) {
    Layer l;
    l.conv = true;
    l.in_c = c, l.in_h = h, l.in_w = w;
    l.kernel = spec.kernel, l.stride = spec.stride;
    l.out_c = spec.filters;
    l.out_h = (h - spec.kernel) / spec.stride + 1;
    l.out_w = (w - spec.kernel) / spec.stride + 1;
    place(l);
    plan.layers.push_back(l);
    c = l.out_c, h = l.out_h, w = l.out_w;
  }
  int width = c * h * w;
  auto add_dense = [&](int out, bool relu) {
    Layer l;
    l.in_c = width;
    l.out_c = out;
    l.relu = relu;
    place(l);
    plan.layers.push_back(l);
    width = out;
  };
  for (int d : net.dense) add_dense(d, true);
  add_dense(net.classes, false);
  return plan;
}

void layer_forward(const Layer& l, const double* p, const std::vector<double>& in, std::vector<double>& out) {
  out.assign(l.out_size(), 0.0);
  const double* wt = p + l.weights;
  const double* b = p + l.biases;
  if (l.conv) {
    const int k = l.kernel;
    for (int f = 0; f < l.out_c; ++f) {
      for (int y = 0; y < l.out_h; ++y) {
        for (int x = 0; x < l.out_w; ++x) {
          double s = b[f];
          for (int ch = 0; ch < l.in_c; ++ch) {
            const double* wk = wt + ((static_cast<std::size_t>(f) * l.in_c + ch) * k) * k;
            const double* src = in.data() + (static_cast<std::size_t>(ch) * l.in_h + y * l.stride) * l.in_w + x * l.stride;
            for (int ky = 0; ky < k; ++ky) {
              for (int kx = 0; kx < k; ++kx) s += wk[ky * k + kx] * src[ky * l.in_w + kx];
            }
          }
          out[(static_cast<std::size_t>(f) * l.out_h + y) * l.out_w + x] = s;
        }
      }
    }
  } else {
    const std::size_t n_in = l.in_size();
    for (int o = 0; o < l.out_c; ++o) {
      const double* row = wt + static_cast<std::size_t>(o) * n_in;
      out[static_cast<std::size_t>(o)] = b[o] + std::inner_product(row, row + n_in, in.data(), 0.0);
    }
  }
  if (l.relu) {
    for (auto& v : out) v = std::max(v, 0.0);
  }
}

// Accumulates parameter gradients into g and writes the input gradient.
void layer_backward(const Layer& l, const double* p, const std::vector<double>& in,
                    const std::vector<double>& d_out, double* g, std::vector<double>& d_in) {
  d_in.assign(l.in_size(), 0.0);
  const double* wt = p + l.weights;
  double* gw = g + l.weights;
  double* gb = g + l.biases;
  if (l.conv) {
    const int k = l.kernel;
    for (int f = 0; f < l.out_c; ++f) {
      for (int y = 0; y < l.out_h; ++y) {
        for (int x = 0; x < l.out_w; ++x) {
          const double d = d_out[(static_cast<std::size_t>(f) * l.out_h + y) * l.out_w + x];
          if (d == 0.0) continue;
          gb[f] += d;
          for (int ch = 0; ch < l.in_c; ++ch) {
            const std::size_t wbase = ((static_cast<std::size_t>(f) * l.in_c + ch) * k) * k;
            const std::size_t ibase = (static_cast<std::size_t>(ch) * l.in_h + y * l.stride) * l.in_w + x * l.stride;
            for (int ky = 0; ky < k; ++ky) {
              for (int kx = 0; kx < k; ++kx) {
                const std::size_t ii = ibase + static_cast<std::size_t>(ky) * l.in_w + kx;
                gw[wbase + ky * k + kx] += d * in[ii];
                d_in[ii] += d * wt[wbase + ky * k + kx];
              }
            }
          }
        }
      }
    }
  } else {
    const std::size_t n_in = l.in_size();
    for (int o = 0; o < l.out_c; ++o) {
      const double d = d_out[static_cast<std::size_t>(o)];
      if (d == 0.0) continue;
      gb[o] += d;
      const double* row = wt + static_cast<std::size_t>(o) * n_in;
      double* grow = gw + static_cast<std::size_t>(o) * n_in;
      for (std::size_t i = 0; i < n_in; ++i) {
        grow[i] += d * in[i];
        d_in[i] += d * row[i];
      }
    }
  }
}

void check_shapes(const NetworkSpec& net, const Plan& plan, const Parameters& params, std::size_t image_size) {
  if (params.size() != plan.parameters) {
    std::ostringstream msg;
    msg << "expected " << plan.parameters << " parameters, got " << params.size();
    throw Error(ErrorKind::ShapeMismatch, msg.str());
  }
  if (image_size != static_cast<std::size_t>(net.height) * static_cast<std::size_t>(net.width)) {
    throw Error(ErrorKind::ShapeMismatch, "image size does not match the network input");
  }
}

std::vector<double> softmax(const std::vector<double>& z) {
  const double peak = *std::max_element(z.begin(), z.end());
  std::vector<double> p(z.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) sum += (p[i] = std::exp(z[i] - peak));
  for (auto& v : p) v /= sum;
  return p;
}

int argmax(const std::vector<double>& v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

// Summed cross-entropy and gradient; optionally records predictions.
LossGrad run_batch(const NetworkSpec& net, const Plan& plan, const Parameters& params,
                   std::span<const Example> batch, std::vector<int>* predictions) {
  if (batch.empty()) throw Error(ErrorKind::DomainError, "empty batch");
  LossGrad out;
  out.grad.assign(params.size(), 0.0);
  const std::size_t depth = plan.layers.size();
  std::vector<std::vector<double>> acts(depth + 1);
  std::vector<double> delta;
  std::vector<double> d_in;
  // per-example buffer, so a batch gradient is an exact sum of item gradients
  std::vector<double> item_grad(params.size());
  for (const auto& ex : batch) {
    check_shapes(net, plan, params, ex.image.size());
    if (ex.label < 0 || ex.label >= net.classes) throw Error(ErrorKind::ShapeMismatch, "label outside [0, classes)");
    acts[0] = ex.image;
    for (std::size_t l = 0; l < depth; ++l) layer_forward(plan.layers[l], params.data(), acts[l], acts[l + 1]);
    const auto& z = acts[depth];
    const double peak = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - peak);
    const double lse = peak + std::log(sum);
    out.loss += lse - z[static_cast<std::size_t>(ex.label)];
    if (predictions) predictions->push_back(argmax(z));

    delta.resize(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) delta[i] = std::exp(z[i] - lse);
    delta[static_cast<std::size_t>(ex.label)] -= 1.0;
    std::fill(item_grad.begin(), item_grad.end(), 0.0);
    for (std::size_t l = depth; l-- > 0;) {
      layer_backward(plan.layers[l], params.data(), acts[l], delta, item_grad.data(), d_in);
      if (l > 0) {
        if (plan.layers[l - 1].relu) {
          for (std::size_t i = 0; i < d_in.size(); ++i) {
            if (acts[l][i] <= 0.0) d_in[i] = 0.0;
          }
        }
        delta.swap(d_in);
      }
    }
    for (std::size_t i = 0; i < item_grad.size(); ++i) out.grad[i] += item_grad[i];
  }
  if (!std::isfinite(out.loss)) throw Error(ErrorKind::NonFiniteLoss, "cross-entropy is not finite");
  return out;
}

std::vector<double> unpack(std::span<const std::uint64_t> packed, std::size_t pixels) {
  std::vector<double> img(pixels);
  for (std::size_t p = 0; p < pixels; ++p) img[p] = static_cast<double>((packed[p / 64] >> (p % 64)) & 1U);
  return img;
}

std::size_t draw_index(CounterRng& rng, std::size_t bound) {
  return std::min(bound - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(bound)));
}

constexpr std::uint64_t kShuffleStream = 0x73687566666c65ULL;
constexpr std::uint64_t kTrainNoiseStream = 0x747261696eULL;
constexpr std::uint64_t kHoldoutNoiseStream = 0x686f6c646f7574ULL;

}  // namespace

NetworkSpec NetworkSpec::mnist_default() {
  NetworkSpec n;
  n.height = 28;
  n.width = 28;
  n.conv = {{8, 3, 1}, {16, 3, 2}};
  n.dense = {64};
  n.classes = 10;
  return n;
}

void NetworkSpec::validate() const {
  if (height < 1 || width < 1 || classes < 1) throw Error(ErrorKind::ShapeMismatch, "network sizes must be >= 1");
  int h = height, w = width;
  for (const auto& c : conv) {
    if (c.filters < 1 || c.kernel < 1 || c.stride < 1) throw Error(ErrorKind::ShapeMismatch, "conv sizes must be >= 1");
    if (c.kernel > h || c.kernel > w) {
      std::ostringstream msg;
      msg << "kernel " << c.kernel << " exceeds input " << h << "x" << w;
      throw Error(ErrorKind::ShapeMismatch, msg.str());
    }
    h = (h - c.kernel) / c.stride + 1;
    w = (w - c.kernel) / c.stride + 1;
  }
  for (int d : dense) {
    if (d < 1) throw Error(ErrorKind::ShapeMismatch, "dense width must be >= 1");
  }
}

std::size_t NetworkSpec::parameter_count() const { return make_plan(*this).parameters; }

std::string NetworkSpec::describe() const {
  std::ostringstream s;
  s << "input=" << height << "x" << width;
  for (const auto& c : conv) s << ";conv=" << c.filters << "/" << c.kernel << "/" << c.stride << "/relu";
  for (int d : dense) s << ";dense=" << d << "/relu";
  s << ";out=" << classes << "/softmax";
  return s.str();
}

Parameters init_parameters(const NetworkSpec& net, std::uint64_t seed) {
  const Plan plan = make_plan(net);
  Parameters p(plan.parameters, 0.0);
  for (std::size_t l = 0; l < plan.layers.size(); ++l) {
    const Layer& layer = plan.layers[l];
    const std::size_t fan_in = layer.conv ? static_cast<std::size_t>(layer.in_c) * layer.kernel * layer.kernel
                                          : layer.in_size();
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    CounterRng rng(seed, 0x696e6974ULL, l);
    for (std::size_t i = 0; i < layer.weight_count(); ++i) p[layer.weights + i] = bound * (2.0 * rng.uniform() - 1.0);
  }
  return p;
}

std::vector<double> forward(const NetworkSpec& net, const Parameters& params, std::span<const double> image) {
  const Plan plan = make_plan(net);
  check_shapes(net, plan, params, image.size());
  std::vector<double> a(image.begin(), image.end());
  std::vector<double> next;
  for (const auto& l : plan.layers) {
    layer_forward(l, params.data(), a, next);
    a.swap(next);
  }
  return softmax(a);
}

LossGrad loss_and_grad(const NetworkSpec& net, const Parameters& params, std::span<const Example> batch) {
  return run_batch(net, make_plan(net), params, batch, nullptr);
}

double mean_loss(const NetworkSpec& net, const Parameters& params, std::span<const Example> batch) {
  return loss_and_grad(net, params, batch).loss / static_cast<double>(batch.size());
}

int cnn_predict(const NetworkSpec& net, const Parameters& params, std::span<const std::uint64_t> packed,
                std::size_t pixels) {
  return argmax(forward(net, params, unpack(packed, pixels)));
}

TrainResult train(const NetworkSpec& net, const BinaryImageDataset& data, const NoiseModel& noise,
                  const TrainConfig& config) {
  if (data.empty()) throw Error(ErrorKind::EmptyTrainingSet, "no training images");
  if (!(config.learning_rate >= 0.0) || config.batch_size < 1 || config.epochs < 0) {
    throw Error(ErrorKind::DomainError, "invalid training configuration");
  }
  if (data.rows() != static_cast<std::size_t>(net.height) || data.cols() != static_cast<std::size_t>(net.width)) {
    throw Error(ErrorKind::ShapeMismatch, "dataset images do not match the network input");
  }
  const Plan plan = make_plan(net);
  const std::size_t n = data.size();
  std::size_t holdout = static_cast<std::size_t>(std::floor(config.holdout_fraction * static_cast<double>(n)));
  if (holdout >= n) holdout = 0;
  const std::size_t n_train = n - holdout;
  const double p = config.noisy_train ? noise.p : 0.0;

  auto noisy_example = [&](std::size_t i, std::uint64_t stream, std::uint64_t counter) {
    std::vector<std::uint64_t> buf(data.words());
    CounterRng rng(config.seed ^ stream, counter, i);
    sample_noisy(data.image(i), buf, data.pixels(), p, rng);
    return Example{unpack(buf, data.pixels()), data.label(i)};
  };

  std::vector<Example> held;
  for (std::size_t i = n_train; i < n; ++i) held.push_back(noisy_example(i, kHoldoutNoiseStream, 0));
  auto holdout_accuracy = [&](const Parameters& params) {
    if (held.empty()) return 0.0;
    std::vector<int> pred;
    run_batch(net, plan, params, held, &pred);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < held.size(); ++i) hits += pred[i] == held[i].label;
    return static_cast<double>(hits) / static_cast<double>(held.size());
  };

  TrainResult result;
  Parameters params = init_parameters(net, config.seed);
  result.params = params;
  double best_score = held.empty() ? -1.0 : holdout_accuracy(params);

  std::vector<std::size_t> order(n_train);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    CounterRng shuffle(config.seed ^ kShuffleStream, static_cast<std::uint64_t>(epoch), 0);
    for (std::size_t i = n_train; i > 1; --i) std::swap(order[i - 1], order[draw_index(shuffle, i)]);

    double loss = 0.0;
    std::size_t hits = 0;
    std::vector<Example> batch;
    std::vector<int> pred;
    for (std::size_t start = 0; start < n_train; start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop = std::min(n_train, start + static_cast<std::size_t>(config.batch_size));
      batch.clear();
      pred.clear();
      for (std::size_t j = start; j < stop; ++j) {
        batch.push_back(noisy_example(order[j], kTrainNoiseStream, static_cast<std::uint64_t>(epoch)));
      }
      const LossGrad lg = run_batch(net, plan, params, batch, &pred);
      loss += lg.loss;
      for (std::size_t j = 0; j < batch.size(); ++j) hits += pred[j] == batch[j].label;
      const double step = config.learning_rate / static_cast<double>(batch.size());
      for (std::size_t k = 0; k < params.size(); ++k) params[k] -= step * lg.grad[k];
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.mean_loss = loss / static_cast<double>(n_train);
    rec.train_accuracy = static_cast<double>(hits) / static_cast<double>(n_train);
    rec.holdout_accuracy = holdout_accuracy(params);
    result.trace.push_back(rec);
    // without a holdout the most recent epoch wins
    const double score = held.empty() ? static_cast<double>(epoch) : rec.holdout_accuracy;
    if (score > best_score) {
      best_score = score;
      result.best_epoch = epoch;
      result.params = params;
    }
  }
  return result;
}

ErrorEstimate evaluate(const NetworkSpec& net, const Parameters& params, const BinaryImageDataset& evaluation,
                       const NoiseModel& noise, int trials, std::uint64_t seed, unsigned threads) {
  const Plan plan = make_plan(net);
  check_shapes(net, plan, params, evaluation.pixels());
  const std::size_t pixels = evaluation.pixels();
  const Classifier classify = [&](std::span<const std::uint64_t> q) {
    std::vector<double> a = unpack(q, pixels);
    std::vector<double> next;
    for (const auto& l : plan.layers) {
      layer_forward(l, params.data(), a, next);
      a.swap(next);
    }
    return argmax(a);
  };
  return estimate_error(classify, evaluation, noise, trials, seed, threads);
}

}  // namespace tpr
