#include "ergoseg/tcn.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "ergoseg/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint io assumes a little-endian host");

namespace ergoseg {

const char* arch_name(Arch arch) {
  switch (arch) {
    case Arch::ed_tcn: return "ed_tcn";
    case Arch::d_tcn: return "d_tcn";
    case Arch::framewise: return "framewise";
  }
  return "?";
}

Arch parse_arch(const std::string& name) {
  if (name == "ed_tcn") return Arch::ed_tcn;
  if (name == "d_tcn") return Arch::d_tcn;
  if (name == "framewise") return Arch::framewise;
  fail(Errc::config_error, "unknown architecture '" + name + "'");
}

// --- layer primitives ---

Matrix conv1d(const Matrix& input, const ConvParams& p) {
  if (static_cast<int>(input.cols()) != p.in_ch)
    fail(Errc::shape_mismatch,
         "conv input has " + std::to_string(input.cols()) + " channels, kernel expects " +
             std::to_string(p.in_ch));
  if (p.width < 1 || p.dilation < 1)
    fail(Errc::shape_mismatch, "conv width and dilation must be >= 1");
  if (!p.causal && p.width % 2 == 0)
    fail(Errc::shape_mismatch, "centered conv requires an odd width");

  const auto T = static_cast<std::ptrdiff_t>(input.rows());
  const int anchor = p.causal ? p.width - 1 : (p.width - 1) / 2;
  Matrix out(input.rows(), static_cast<std::size_t>(p.out_ch));
  for (std::ptrdiff_t t = 0; t < T; ++t) {
    double* out_row = out.row(static_cast<std::size_t>(t));
    for (int co = 0; co < p.out_ch; ++co) out_row[co] = p.b[static_cast<std::size_t>(co)];
    for (int k = 0; k < p.width; ++k) {
      const std::ptrdiff_t tt = t + static_cast<std::ptrdiff_t>(k - anchor) * p.dilation;
      if (tt < 0 || tt >= T) continue;
      const double* in_row = input.row(static_cast<std::size_t>(tt));
      const double* w_tap = p.w.data() +
                            static_cast<std::size_t>(k) * static_cast<std::size_t>(p.in_ch) *
                                static_cast<std::size_t>(p.out_ch);
      for (int ci = 0; ci < p.in_ch; ++ci) {
        const double x = in_row[ci];
        if (x == 0.0) continue;
        const double* w_row = w_tap + static_cast<std::size_t>(ci) * static_cast<std::size_t>(p.out_ch);
        for (int co = 0; co < p.out_ch; ++co) out_row[co] += x * w_row[co];
      }
    }
  }
  return out;
}

void conv1d_backward(const Matrix& input, const ConvParams& p,
                     const Matrix& grad_out, Matrix* grad_in,
                     ConvParams* grad_p) {
  const auto T = static_cast<std::ptrdiff_t>(input.rows());
  const int anchor = p.causal ? p.width - 1 : (p.width - 1) / 2;
  for (std::ptrdiff_t t = 0; t < T; ++t) {
    const double* g_row = grad_out.row(static_cast<std::size_t>(t));
    if (grad_p)
      for (int co = 0; co < p.out_ch; ++co)
        grad_p->b[static_cast<std::size_t>(co)] += g_row[co];
    for (int k = 0; k < p.width; ++k) {
      const std::ptrdiff_t tt = t + static_cast<std::ptrdiff_t>(k - anchor) * p.dilation;
      if (tt < 0 || tt >= T) continue;
      const double* in_row = input.row(static_cast<std::size_t>(tt));
      double* gin_row = grad_in ? grad_in->row(static_cast<std::size_t>(tt)) : nullptr;
      const std::size_t tap =
          static_cast<std::size_t>(k) * static_cast<std::size_t>(p.in_ch) *
          static_cast<std::size_t>(p.out_ch);
      for (int ci = 0; ci < p.in_ch; ++ci) {
        const std::size_t base = tap + static_cast<std::size_t>(ci) * static_cast<std::size_t>(p.out_ch);
        const double* w_row = p.w.data() + base;
        double* gw_row = grad_p ? grad_p->w.data() + base : nullptr;
        const double x = in_row[ci];
        double acc = 0.0;
        for (int co = 0; co < p.out_ch; ++co) {
          const double g = g_row[co];
          acc += g * w_row[co];
          if (gw_row) gw_row[co] += x * g;
        }
        if (gin_row) gin_row[ci] += acc;
      }
    }
  }
}

Matrix maxpool2(const Matrix& input, std::vector<std::uint32_t>* argmax) {
  if (input.rows() % 2 != 0)
    fail(Errc::shape_mismatch, "maxpool2 requires an even number of rows");
  const std::size_t out_rows = input.rows() / 2;
  Matrix out(out_rows, input.cols());
  if (argmax) argmax->assign(out_rows * input.cols(), 0);
  for (std::size_t t = 0; t < out_rows; ++t) {
    const double* a = input.row(2 * t);
    const double* b = input.row(2 * t + 1);
    double* o = out.row(t);
    for (std::size_t c = 0; c < input.cols(); ++c) {
      // ties keep the earlier index
      if (b[c] > a[c]) {
        o[c] = b[c];
        if (argmax) (*argmax)[t * input.cols() + c] = 1;
      } else {
        o[c] = a[c];
      }
    }
  }
  return out;
}

Matrix maxpool2_backward(const Matrix& grad_out,
                         const std::vector<std::uint32_t>& argmax,
                         std::size_t input_rows) {
  Matrix grad_in(input_rows, grad_out.cols());
  for (std::size_t t = 0; t < grad_out.rows(); ++t) {
    const double* g = grad_out.row(t);
    for (std::size_t c = 0; c < grad_out.cols(); ++c) {
      const std::size_t winner = 2 * t + argmax[t * grad_out.cols() + c];
      grad_in(winner, c) += g[c];
    }
  }
  return grad_in;
}

Matrix upsample2(const Matrix& input) {
  Matrix out(input.rows() * 2, input.cols());
  for (std::size_t t = 0; t < input.rows(); ++t) {
    std::memcpy(out.row(2 * t), input.row(t), input.cols() * sizeof(double));
    std::memcpy(out.row(2 * t + 1), input.row(t), input.cols() * sizeof(double));
  }
  return out;
}

Matrix upsample2_backward(const Matrix& grad_out) {
  Matrix grad_in(grad_out.rows() / 2, grad_out.cols());
  for (std::size_t t = 0; t < grad_in.rows(); ++t) {
    const double* a = grad_out.row(2 * t);
    const double* b = grad_out.row(2 * t + 1);
    double* o = grad_in.row(t);
    for (std::size_t c = 0; c < grad_out.cols(); ++c) o[c] = a[c] + b[c];
  }
  return grad_in;
}

Matrix relu(const Matrix& input) {
  Matrix out = input;
  for (double& v : out.values())
    if (v < 0.0) v = 0.0;
  return out;
}

Matrix relu_backward(const Matrix& output, const Matrix& grad_out) {
  Matrix grad_in = grad_out;
  for (std::size_t i = 0; i < grad_in.values().size(); ++i)
    if (output.values()[i] <= 0.0) grad_in.values()[i] = 0.0;
  return grad_in;
}

Matrix gated(const Matrix& pre) {
  if (pre.cols() % 2 != 0)
    fail(Errc::shape_mismatch, "gated activation needs an even channel count");
  const std::size_t half = pre.cols() / 2;
  Matrix out(pre.rows(), half);
  for (std::size_t t = 0; t < pre.rows(); ++t) {
    const double* row = pre.row(t);
    double* o = out.row(t);
    for (std::size_t c = 0; c < half; ++c)
      o[c] = std::tanh(row[c]) / (1.0 + std::exp(-row[half + c]));
  }
  return out;
}

Matrix gated_backward(const Matrix& pre, const Matrix& grad_out) {
  const std::size_t half = pre.cols() / 2;
  Matrix grad_in(pre.rows(), pre.cols());
  for (std::size_t t = 0; t < pre.rows(); ++t) {
    const double* row = pre.row(t);
    const double* g = grad_out.row(t);
    double* o = grad_in.row(t);
    for (std::size_t c = 0; c < half; ++c) {
      const double th = std::tanh(row[c]);
      const double sg = 1.0 / (1.0 + std::exp(-row[half + c]));
      o[c] = g[c] * sg * (1.0 - th * th);
      o[half + c] = g[c] * th * sg * (1.0 - sg);
    }
  }
  return grad_in;
}

void softmax_rows(Matrix& m) {
  for (std::size_t t = 0; t < m.rows(); ++t) {
    double* row = m.row(t);
    double max_v = row[0];
    for (std::size_t c = 1; c < m.cols(); ++c) max_v = std::max(max_v, row[c]);
    double sum = 0.0;
    for (std::size_t c = 0; c < m.cols(); ++c) {
      row[c] = std::exp(row[c] - max_v);
      sum += row[c];
    }
    for (std::size_t c = 0; c < m.cols(); ++c) row[c] /= sum;
  }
}

double cross_entropy(const Matrix& probs, const std::vector<int>& labels,
                     std::size_t n_real, Matrix* grad_logits) {
  if (labels.size() < n_real)
    fail(Errc::shape_mismatch, "fewer labels than real frames");
  double loss = 0.0;
  const double inv = 1.0 / static_cast<double>(n_real);
  if (grad_logits) *grad_logits = Matrix(probs.rows(), probs.cols());
  for (std::size_t t = 0; t < n_real; ++t) {
    const int y = labels[t];
    if (y < 0 || static_cast<std::size_t>(y) >= probs.cols())
      fail(Errc::dims_mismatch, "label out of range");
    const double p = std::max(probs(t, static_cast<std::size_t>(y)), 1e-300);
    loss -= std::log(p) * inv;
    if (grad_logits) {
      double* g = grad_logits->row(t);
      const double* pr = probs.row(t);
      for (std::size_t c = 0; c < probs.cols(); ++c) g[c] = pr[c] * inv;
      g[y] -= inv;
    }
  }
  return loss;
}

// --- structure / initialization ---

namespace {

ConvParams make_conv(int width, int in_ch, int out_ch, int dilation, bool causal) {
  ConvParams p;
  p.width = width;
  p.in_ch = in_ch;
  p.out_ch = out_ch;
  p.dilation = dilation;
  p.causal = causal;
  p.w.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(in_ch) *
                 static_cast<std::size_t>(out_ch),
             0.0);
  p.b.assign(static_cast<std::size_t>(out_ch), 0.0);
  return p;
}

int odd_filter_width(double duration_s, double fps) {
  int width = static_cast<int>(std::llround(duration_s * fps));
  if (width < 1) width = 1;
  if (width % 2 == 0) ++width;
  return width;
}

// Mean segment length (frames) of the class with the shortest mean, over the
// whole training set.
double shortest_class_mean_frames(const Dataset& data) {
  std::vector<double> sums(static_cast<std::size_t>(data.label_set.size()), 0.0);
  std::vector<int> counts(static_cast<std::size_t>(data.label_set.size()), 0);
  for (const auto& item : data.items)
    for (const auto& [id, length] : run_length_encode(item.frame_labels).runs) {
      sums[static_cast<std::size_t>(id)] += static_cast<double>(length);
      counts[static_cast<std::size_t>(id)] += 1;
    }
  double shortest = 0.0;
  bool found = false;
  for (std::size_t c = 0; c < sums.size(); ++c) {
    if (counts[c] == 0) continue;
    const double mean = sums[c] / counts[c];
    if (!found || mean < shortest) {
      shortest = mean;
      found = true;
    }
  }
  if (!found) fail(Errc::empty_input, "training set has no segments");
  return shortest;
}

void glorot_fill(ConvParams& p, Rng& rng) {
  const double fan_in = static_cast<double>(p.width) * p.in_ch;
  const double fan_out = static_cast<double>(p.width) * p.out_ch;
  const double scale = std::sqrt(6.0 / (fan_in + fan_out));
  for (double& v : p.w) v = rng.uniform(-scale, scale);
  for (double& v : p.b) v = 0.0;
}

}  // namespace

void build_structure(ModelParams& params) {
  params.encoder.clear();
  params.decoder.clear();
  params.dilated.clear();
  if (params.n_classes < 1 || params.input_dims < 1)
    fail(Errc::dims_mismatch, "model needs at least one class and one input dim");

  switch (params.arch) {
    case Arch::ed_tcn: {
      const auto& filters = params.ed.encoder_filters;
      if (filters.empty())
        fail(Errc::config_error, "ed_tcn needs at least one encoder layer");
      int in_ch = params.input_dims;
      for (const int f : filters) {
        params.encoder.push_back(make_conv(params.filter_width, in_ch, f, 1, false));
        in_ch = f;
      }
      std::vector<int> reversed(filters.rbegin(), filters.rend());
      for (const int f : reversed) {
        params.decoder.push_back(make_conv(params.filter_width, in_ch, f, 1, false));
        in_ch = f;
      }
      params.head = make_conv(1, in_ch, params.n_classes, 1, false);
      break;
    }
    case Arch::d_tcn: {
      if (static_cast<int>(params.dt.filters_per_layer.size()) !=
          params.dt.layers_per_stack)
        fail(Errc::config_error,
             "d_tcn filters_per_layer must list one count per layer");
      if (params.dt.stacks < 1 || params.dt.layers_per_stack < 1)
        fail(Errc::config_error, "d_tcn needs at least one stack and layer");
      const int skip_ch = params.dt.filters_per_layer.back();
      int in_ch = params.input_dims;
      for (int s = 0; s < params.dt.stacks; ++s)
        for (int l = 0; l < params.dt.layers_per_stack; ++l) {
          const int out_ch = params.dt.filters_per_layer[static_cast<std::size_t>(l)];
          const int dilation = 1 << l;
          ModelParams::DilatedLayer layer;
          layer.gate = make_conv(2, in_ch, 2 * out_ch, dilation, true);
          layer.in_proj = make_conv(1, in_ch, out_ch, 1, false);
          layer.res = make_conv(1, out_ch, out_ch, 1, false);
          layer.skip = make_conv(1, out_ch, skip_ch, 1, false);
          params.dilated.push_back(std::move(layer));
          in_ch = out_ch;
        }
      params.head = make_conv(1, skip_ch, params.n_classes, 1, false);
      break;
    }
    case Arch::framewise:
      params.head = make_conv(1, params.input_dims, params.n_classes, 1, false);
      break;
  }
}

ModelParams init_model(const TrainSpec& spec, int n_classes, int input_dims,
                       double fps, std::uint64_t seed,
                       const Dataset* filter_duration_source) {
  ModelParams params;
  params.arch = spec.arch;
  params.ed = spec.ed;
  params.dt = spec.dt;
  params.fw = spec.fw;
  params.n_classes = n_classes;
  params.input_dims = input_dims;
  params.fps_at_train = fps;
  if (spec.arch == Arch::ed_tcn) {
    double duration = spec.ed.filter_duration_s;
    if (spec.ed.filter_mode == FilterDurationMode::shortest_class_mean) {
      if (!filter_duration_source)
        fail(Errc::config_error,
             "shortest_class_mean filter mode needs a training set");
      duration = shortest_class_mean_frames(*filter_duration_source) / fps;
    }
    params.filter_width = odd_filter_width(duration, fps);
  }
  build_structure(params);
  Rng rng(seed);
  for (auto& conv : params.encoder) glorot_fill(conv, rng);
  for (auto& conv : params.decoder) glorot_fill(conv, rng);
  for (auto& layer : params.dilated) {
    glorot_fill(layer.gate, rng);
    glorot_fill(layer.in_proj, rng);
    glorot_fill(layer.res, rng);
    glorot_fill(layer.skip, rng);
  }
  glorot_fill(params.head, rng);
  return params;
}

std::vector<TensorRef> tensor_refs(ModelParams& params) {
  std::vector<TensorRef> refs;
  const auto add = [&refs](const std::string& name, ConvParams& p) {
    refs.push_back({name + ".w",
                    &p.w,
                    {static_cast<std::uint64_t>(p.width),
                     static_cast<std::uint64_t>(p.in_ch),
                     static_cast<std::uint64_t>(p.out_ch)}});
    refs.push_back({name + ".b", &p.b, {static_cast<std::uint64_t>(p.out_ch)}});
  };
  for (std::size_t i = 0; i < params.encoder.size(); ++i)
    add("enc" + std::to_string(i), params.encoder[i]);
  for (std::size_t i = 0; i < params.decoder.size(); ++i)
    add("dec" + std::to_string(i), params.decoder[i]);
  for (std::size_t i = 0; i < params.dilated.size(); ++i) {
    const std::string base = "dt" + std::to_string(i);
    add(base + ".gate", params.dilated[i].gate);
    add(base + ".in_proj", params.dilated[i].in_proj);
    add(base + ".res", params.dilated[i].res);
    add(base + ".skip", params.dilated[i].skip);
  }
  add("head", params.head);
  return refs;
}

// --- forward passes ---

namespace {

struct EdCache {
  Matrix input;  // padded
  std::vector<Matrix> enc_act;
  std::vector<std::vector<std::uint32_t>> pool_idx;
  std::vector<Matrix> pooled;
  std::vector<Matrix> dec_up;
  std::vector<Matrix> dec_act;
  Matrix probs;
};

Matrix pad_repeat_rows(const Matrix& features, std::size_t target_rows) {
  if (features.rows() >= target_rows) return features;
  Matrix out(target_rows, features.cols());
  std::memcpy(out.row(0), features.row(0),
              features.size() * sizeof(double));
  const double* last = features.row(features.rows() - 1);
  for (std::size_t t = features.rows(); t < target_rows; ++t)
    std::memcpy(out.row(t), last, features.cols() * sizeof(double));
  return out;
}

Matrix ed_forward_impl(const ModelParams& params, const Matrix& features,
                       EdCache* cache) {
  const auto factor = static_cast<std::size_t>(params.pool_factor());
  if (features.rows() < factor)
    fail(Errc::sequence_too_short,
         "sequence of " + std::to_string(features.rows()) +
             " frames is shorter than the pooling factor " +
             std::to_string(factor));
  const std::size_t padded = (features.rows() + factor - 1) / factor * factor;
  Matrix x = pad_repeat_rows(features, padded);
  if (cache) cache->input = x;

  for (const auto& conv : params.encoder) {
    Matrix act = relu(conv1d(x, conv));
    std::vector<std::uint32_t> idx;
    Matrix pooled = maxpool2(act, &idx);
    if (cache) {
      cache->enc_act.push_back(std::move(act));
      cache->pool_idx.push_back(std::move(idx));
      cache->pooled.push_back(pooled);
    }
    x = std::move(pooled);
  }
  for (const auto& conv : params.decoder) {
    Matrix up = upsample2(x);
    Matrix act = relu(conv1d(up, conv));
    if (cache) {
      cache->dec_up.push_back(std::move(up));
      cache->dec_act.push_back(act);
    }
    x = std::move(act);
  }
  Matrix probs = conv1d(x, params.head);
  softmax_rows(probs);
  if (cache) cache->probs = probs;
  return probs;
}

struct DtCache {
  std::vector<Matrix> xs;  // inputs of each layer (xs[0] = features)
  std::vector<Matrix> gates;
  std::vector<Matrix> zs;
  Matrix skip_act;
  Matrix probs;
};

Matrix dt_forward_impl(const ModelParams& params, const Matrix& features,
                       DtCache* cache) {
  Matrix x = features;
  Matrix skip_sum(features.rows(),
                  static_cast<std::size_t>(params.head.in_ch));
  for (const auto& layer : params.dilated) {
    if (cache) cache->xs.push_back(x);
    Matrix gate_pre = conv1d(x, layer.gate);
    Matrix z = gated(gate_pre);
    Matrix sk = conv1d(z, layer.skip);
    for (std::size_t i = 0; i < skip_sum.values().size(); ++i)
      skip_sum.values()[i] += sk.values()[i];
    Matrix next = conv1d(z, layer.res);
    Matrix proj = conv1d(x, layer.in_proj);
    for (std::size_t i = 0; i < next.values().size(); ++i)
      next.values()[i] += proj.values()[i];
    if (cache) {
      cache->gates.push_back(std::move(gate_pre));
      cache->zs.push_back(std::move(z));
    }
    x = std::move(next);
  }
  Matrix skip_act = relu(skip_sum);
  Matrix probs = conv1d(skip_act, params.head);
  softmax_rows(probs);
  if (cache) {
    cache->skip_act = std::move(skip_act);
    cache->probs = probs;
  }
  return probs;
}

void check_dims(const ModelParams& params, const Matrix& features) {
  if (static_cast<int>(features.cols()) != params.input_dims)
    fail(Errc::dims_mismatch,
         "features have " + std::to_string(features.cols()) +
             " dims, model expects " + std::to_string(params.input_dims));
  if (features.rows() == 0) fail(Errc::dims_mismatch, "empty feature sequence");
}

}  // namespace

Matrix ed_tcn_forward(const ModelParams& params, const Matrix& features) {
  check_dims(params, features);
  Matrix probs = ed_forward_impl(params, features, nullptr);
  if (probs.rows() == features.rows()) return probs;
  Matrix out(features.rows(), probs.cols());
  std::memcpy(out.values().data(), probs.values().data(),
              out.size() * sizeof(double));
  return out;
}

Matrix d_tcn_forward(const ModelParams& params, const Matrix& features) {
  check_dims(params, features);
  return dt_forward_impl(params, features, nullptr);
}

Matrix framewise_forward(const ModelParams& params, const Matrix& features) {
  check_dims(params, features);
  Matrix probs = conv1d(features, params.head);
  softmax_rows(probs);
  return probs;
}

Matrix model_forward(const ModelParams& params, const Matrix& features) {
  switch (params.arch) {
    case Arch::ed_tcn: return ed_tcn_forward(params, features);
    case Arch::d_tcn: return d_tcn_forward(params, features);
    case Arch::framewise: return framewise_forward(params, features);
  }
  fail(Errc::config_error, "unknown architecture tag");
}

// --- loss and gradients ---

namespace {

void zero_tensors(ModelParams& params) {
  for (auto& ref : tensor_refs(params))
    std::fill(ref.values->begin(), ref.values->end(), 0.0);
}

double probs_to_loss_grad(const Matrix& probs, const std::vector<int>& labels,
                          Matrix* grad_logits) {
  return cross_entropy(probs, labels, labels.size(), grad_logits);
}

}  // namespace

double model_loss(const ModelParams& params, const Matrix& features,
                  const std::vector<int>& labels) {
  if (labels.size() != features.rows())
    fail(Errc::dims_mismatch, "one label per frame required");
  const Matrix probs = model_forward(params, features);
  return cross_entropy(probs, labels, labels.size(), nullptr);
}

double model_loss_and_grads(const ModelParams& params, const Matrix& features,
                            const std::vector<int>& labels,
                            ModelParams* grads) {
  check_dims(params, features);
  if (labels.size() != features.rows())
    fail(Errc::dims_mismatch, "one label per frame required");
  *grads = params;
  zero_tensors(*grads);

  switch (params.arch) {
    case Arch::ed_tcn: {
      EdCache cache;
      ed_forward_impl(params, features, &cache);
      // Padded rows carry no loss.
      Matrix grad_logits;
      const double loss =
          cross_entropy(cache.probs, labels, labels.size(), &grad_logits);

      const std::size_t L = params.encoder.size();
      const Matrix& head_in = cache.dec_act.back();
      Matrix cur(head_in.rows(), head_in.cols());
      conv1d_backward(head_in, params.head, grad_logits, &cur, &grads->head);

      for (std::size_t l = L; l-- > 0;) {
        const Matrix d_pre = relu_backward(cache.dec_act[l], cur);
        Matrix d_up(cache.dec_up[l].rows(), cache.dec_up[l].cols());
        conv1d_backward(cache.dec_up[l], params.decoder[l], d_pre, &d_up,
                        &grads->decoder[l]);
        cur = upsample2_backward(d_up);
      }
      for (std::size_t l = L; l-- > 0;) {
        const Matrix d_act =
            maxpool2_backward(cur, cache.pool_idx[l], cache.enc_act[l].rows());
        const Matrix d_pre = relu_backward(cache.enc_act[l], d_act);
        const Matrix& in = l == 0 ? cache.input : cache.pooled[l - 1];
        Matrix d_in(in.rows(), in.cols());
        conv1d_backward(in, params.encoder[l], d_pre, &d_in, &grads->encoder[l]);
        cur = std::move(d_in);
      }
      return loss;
    }
    case Arch::d_tcn: {
      DtCache cache;
      dt_forward_impl(params, features, &cache);
      Matrix grad_logits;
      const double loss = probs_to_loss_grad(cache.probs, labels, &grad_logits);

      Matrix d_skip_act(cache.skip_act.rows(), cache.skip_act.cols());
      conv1d_backward(cache.skip_act, params.head, grad_logits, &d_skip_act,
                      &grads->head);
      const Matrix d_skip_sum = relu_backward(cache.skip_act, d_skip_act);

      // The trunk output past the last layer feeds nothing.
      Matrix d_x(features.rows(), static_cast<std::size_t>(
                                      params.dilated.back().res.out_ch));
      for (std::size_t l = params.dilated.size(); l-- > 0;) {
        const auto& layer = params.dilated[l];
        auto& g_layer = grads->dilated[l];
        Matrix d_z(cache.zs[l].rows(), cache.zs[l].cols());
        conv1d_backward(cache.zs[l], layer.res, d_x, &d_z, &g_layer.res);
        conv1d_backward(cache.zs[l], layer.skip, d_skip_sum, &d_z, &g_layer.skip);
        const Matrix d_gate = gated_backward(cache.gates[l], d_z);
        Matrix d_in(cache.xs[l].rows(), cache.xs[l].cols());
        conv1d_backward(cache.xs[l], layer.gate, d_gate, &d_in, &g_layer.gate);
        conv1d_backward(cache.xs[l], layer.in_proj, d_x, &d_in, &g_layer.in_proj);
        d_x = std::move(d_in);
      }
      return loss;
    }
    case Arch::framewise: {
      Matrix probs = conv1d(features, params.head);
      softmax_rows(probs);
      Matrix grad_logits;
      const double loss = probs_to_loss_grad(probs, labels, &grad_logits);
      conv1d_backward(features, params.head, grad_logits, nullptr, &grads->head);
      return loss;
    }
  }
  fail(Errc::config_error, "unknown architecture tag");
}

// --- training ---

namespace {

enum class OptimizerKind { rmsprop, adam };

struct OptimizerState {
  OptimizerKind kind = OptimizerKind::adam;
  double learning_rate = 0.001;
  std::vector<std::vector<double>> first;
  std::vector<std::vector<double>> second;
  long step = 0;
};

void optimizer_update(OptimizerState& state, ModelParams& params,
                      ModelParams& grads) {
  constexpr double kEps = 1e-8;
  auto p_refs = tensor_refs(params);
  auto g_refs = tensor_refs(grads);
  if (state.first.empty()) {
    for (const auto& ref : p_refs) {
      state.first.emplace_back(ref.values->size(), 0.0);
      state.second.emplace_back(ref.values->size(), 0.0);
    }
  }
  ++state.step;
  for (std::size_t i = 0; i < p_refs.size(); ++i) {
    auto& p = *p_refs[i].values;
    const auto& g = *g_refs[i].values;
    auto& m = state.first[i];
    auto& v = state.second[i];
    if (state.kind == OptimizerKind::rmsprop) {
      for (std::size_t j = 0; j < p.size(); ++j) {
        v[j] = 0.9 * v[j] + 0.1 * g[j] * g[j];
        p[j] -= state.learning_rate * g[j] / (std::sqrt(v[j]) + kEps);
      }
    } else {
      const double bc1 = 1.0 - std::pow(0.9, static_cast<double>(state.step));
      const double bc2 = 1.0 - std::pow(0.999, static_cast<double>(state.step));
      for (std::size_t j = 0; j < p.size(); ++j) {
        m[j] = 0.9 * m[j] + 0.1 * g[j];
        v[j] = 0.999 * v[j] + 0.001 * g[j] * g[j];
        p[j] -= state.learning_rate * (m[j] / bc1) /
                (std::sqrt(v[j] / bc2) + kEps);
      }
    }
  }
}

double dataset_accuracy(const ModelParams& params, const Dataset& data) {
  std::size_t correct = 0, total = 0;
  for (const auto& item : data.items) {
    const std::vector<int> pred = predict(params, item.features.data);
    for (std::size_t t = 0; t < pred.size(); ++t)
      if (pred[t] == item.frame_labels[t]) ++correct;
    total += pred.size();
  }
  return total > 0 ? 100.0 * static_cast<double>(correct) / static_cast<double>(total)
                   : 0.0;
}

}  // namespace

std::pair<ModelParams, TrainReport> train(const Dataset& data,
                                          const TrainSpec& spec,
                                          std::uint64_t seed,
                                          const Dataset* validation) {
  if (data.items.empty()) fail(Errc::empty_input, "training set is empty");
  const int dims = static_cast<int>(data.items[0].features.dims());
  const int n_classes = data.label_set.size();
  for (const auto& item : data.items) {
    if (static_cast<int>(item.features.dims()) != dims)
      fail(Errc::dims_mismatch, "inconsistent feature dims across videos");
    if (item.frame_labels.size() != item.features.frames())
      fail(Errc::dims_mismatch, "labels and features disagree on frame count");
    for (const int y : item.frame_labels)
      if (y < 0 || y >= n_classes)
        fail(Errc::dims_mismatch, "label id outside the label set");
  }
  const double fps = data.items[0].features.fps;

  const auto t0 = std::chrono::steady_clock::now();
  ModelParams params = init_model(spec, n_classes, dims, fps, seed, &data);

  OptimizerState opt;
  opt.kind = spec.arch == Arch::ed_tcn ? OptimizerKind::rmsprop
                                       : OptimizerKind::adam;
  int epochs = 0;
  switch (spec.arch) {
    case Arch::ed_tcn:
      opt.learning_rate = spec.ed.learning_rate;
      epochs = spec.ed.epochs;
      break;
    case Arch::d_tcn:
      opt.learning_rate = spec.dt.learning_rate;
      epochs = spec.dt.epochs;
      break;
    case Arch::framewise:
      opt.learning_rate = spec.fw.learning_rate;
      epochs = spec.fw.epochs;
      break;
  }

  TrainReport report;
  report.seed = seed;
  Rng order_rng = Rng(seed).fork(1);
  std::vector<std::size_t> order(data.items.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  ModelParams grads;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    order_rng.shuffle(order);
    double epoch_loss = 0.0;
    for (const std::size_t v : order) {
      const auto& item = data.items[v];
      const double loss = model_loss_and_grads(params, item.features.data,
                                               item.frame_labels, &grads);
      if (!std::isfinite(loss))
        fail(Errc::non_finite_loss,
             "training loss became non-finite at epoch " + std::to_string(epoch));
      if (opt.learning_rate != 0.0) optimizer_update(opt, params, grads);
      epoch_loss += loss;
    }
    report.epoch_loss.push_back(epoch_loss / static_cast<double>(order.size()));
    report.epoch_accuracy.push_back(
        dataset_accuracy(params, validation ? *validation : data));
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(params), std::move(report)};
}

std::vector<int> predict(const ModelParams& params, const Matrix& features) {
  const Matrix probs = model_forward(params, features);
  std::vector<int> out;
  out.reserve(probs.rows());
  for (std::size_t t = 0; t < probs.rows(); ++t) {
    const double* row = probs.row(t);
    int best = 0;
    for (std::size_t c = 1; c < probs.cols(); ++c)
      if (row[c] > row[best]) best = static_cast<int>(c);
    out.push_back(best);
  }
  return out;
}

// --- streaming ---

StreamingPredictor::StreamingPredictor(const ModelParams& model, int window)
    : model_(model), window_(window) {
  if (window < 1) fail(Errc::window_too_small, "window must be >= 1");
  if (model.arch == Arch::ed_tcn && window < model.pool_factor())
    fail(Errc::window_too_small,
         "window " + std::to_string(window) + " is below the pooling factor " +
             std::to_string(model.pool_factor()));
  buffer_ = Matrix(static_cast<std::size_t>(window),
                   static_cast<std::size_t>(model.input_dims));
}

void StreamingPredictor::push(const double* frame, std::size_t dims) {
  if (dims != static_cast<std::size_t>(model_.input_dims))
    fail(Errc::dims_mismatch, "streamed frame has the wrong dimension");
  std::memcpy(buffer_.row(buffered_), frame, dims * sizeof(double));
  if (++buffered_ == static_cast<std::size_t>(window_))
    flush(static_cast<std::size_t>(window_));
}

void StreamingPredictor::push(const Matrix& frames) {
  for (std::size_t t = 0; t < frames.rows(); ++t)
    push(frames.row(t), frames.cols());
}

void StreamingPredictor::finish() {
  if (buffered_ > 0) flush(buffered_);
}

void StreamingPredictor::flush(std::size_t n_real) {
  // A partial window is padded to the window length by repeating its last
  // frame; the architecture pads further if it needs to.
  const double* last = buffer_.row(n_real - 1);
  for (std::size_t t = n_real; t < static_cast<std::size_t>(window_); ++t)
    std::memcpy(buffer_.row(t), last, buffer_.cols() * sizeof(double));
  const std::vector<int> ids = predict(model_, buffer_);
  emitted_.insert(emitted_.end(), ids.begin(),
                  ids.begin() + static_cast<std::ptrdiff_t>(n_real));
  buffered_ = 0;
}

std::vector<int> StreamingPredictor::drain() {
  std::vector<int> out;
  out.swap(emitted_);
  return out;
}

std::vector<int> predict_windowed(const ModelParams& params,
                                  const Matrix& features, int window) {
  StreamingPredictor predictor(params, window);
  predictor.push(features);
  predictor.finish();
  return predictor.drain();
}

// --- checkpoints ---

namespace {

constexpr char kModelMagic[4] = {'T', 'C', 'N', 'M'};
constexpr std::uint32_t kModelVersion = 1;

template <typename T>
void write_raw(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::istream& in, const char* what) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (in.gcount() != static_cast<std::streamsize>(sizeof(T)))
    fail(Errc::truncated_payload, std::string("checkpoint ends inside ") + what);
  return value;
}

std::string join_ints(const std::vector<int>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(values[i]);
  }
  return out;
}

std::vector<int> split_ints(const std::string& text) {
  std::vector<int> out;
  std::size_t start = 0;
  while (start <= text.size() && !text.empty()) {
    std::size_t end = text.find(',', start);
    if (end == std::string::npos) end = text.size();
    out.push_back(std::stoi(text.substr(start, end - start)));
    if (end == text.size()) break;
    start = end + 1;
  }
  return out;
}

std::string config_echo(const ModelParams& p) {
  std::ostringstream out;
  out.precision(17);
  out << "arch = " << arch_name(p.arch) << "\n";
  out << "n_classes = " << p.n_classes << "\n";
  out << "input_dims = " << p.input_dims << "\n";
  out << "fps_at_train = " << p.fps_at_train << "\n";
  out << "filter_width = " << p.filter_width << "\n";
  out << "ed.encoder_filters = " << join_ints(p.ed.encoder_filters) << "\n";
  out << "ed.filter_duration_s = " << p.ed.filter_duration_s << "\n";
  out << "ed.learning_rate = " << p.ed.learning_rate << "\n";
  out << "ed.epochs = " << p.ed.epochs << "\n";
  out << "dt.stacks = " << p.dt.stacks << "\n";
  out << "dt.layers_per_stack = " << p.dt.layers_per_stack << "\n";
  out << "dt.filters_per_layer = " << join_ints(p.dt.filters_per_layer) << "\n";
  out << "dt.learning_rate = " << p.dt.learning_rate << "\n";
  out << "dt.epochs = " << p.dt.epochs << "\n";
  out << "fw.learning_rate = " << p.fw.learning_rate << "\n";
  out << "fw.epochs = " << p.fw.epochs << "\n";
  return out.str();
}

void apply_config_echo(ModelParams& p, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    const auto trim = [](std::string s) {
      const std::size_t a = s.find_first_not_of(" \t");
      const std::size_t b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "arch") p.arch = parse_arch(value);
    else if (key == "n_classes") p.n_classes = std::stoi(value);
    else if (key == "input_dims") p.input_dims = std::stoi(value);
    else if (key == "fps_at_train") p.fps_at_train = std::stod(value);
    else if (key == "filter_width") p.filter_width = std::stoi(value);
    else if (key == "ed.encoder_filters") p.ed.encoder_filters = split_ints(value);
    else if (key == "ed.filter_duration_s") p.ed.filter_duration_s = std::stod(value);
    else if (key == "ed.learning_rate") p.ed.learning_rate = std::stod(value);
    else if (key == "ed.epochs") p.ed.epochs = std::stoi(value);
    else if (key == "dt.stacks") p.dt.stacks = std::stoi(value);
    else if (key == "dt.layers_per_stack") p.dt.layers_per_stack = std::stoi(value);
    else if (key == "dt.filters_per_layer") p.dt.filters_per_layer = split_ints(value);
    else if (key == "dt.learning_rate") p.dt.learning_rate = std::stod(value);
    else if (key == "dt.epochs") p.dt.epochs = std::stoi(value);
    else if (key == "fw.learning_rate") p.fw.learning_rate = std::stod(value);
    else if (key == "fw.epochs") p.fw.epochs = std::stoi(value);
    else fail(Errc::config_error, "unknown checkpoint config key '" + key + "'");
  }
}

}  // namespace

void save_model(const ModelParams& params, std::ostream& out) {
  out.write(kModelMagic, 4);
  write_raw(out, kModelVersion);
  write_raw(out, static_cast<std::uint32_t>(params.arch));
  const std::string echo = config_echo(params);
  write_raw(out, static_cast<std::uint64_t>(echo.size()));
  out.write(echo.data(), static_cast<std::streamsize>(echo.size()));

  auto refs = tensor_refs(const_cast<ModelParams&>(params));
  write_raw(out, static_cast<std::uint64_t>(refs.size()));
  for (const auto& ref : refs) {
    write_raw(out, static_cast<std::uint32_t>(ref.name.size()));
    out.write(ref.name.data(), static_cast<std::streamsize>(ref.name.size()));
    write_raw(out, static_cast<std::uint32_t>(ref.shape.size()));
    for (const auto dim : ref.shape) write_raw(out, dim);
    out.write(reinterpret_cast<const char*>(ref.values->data()),
              static_cast<std::streamsize>(ref.values->size() * sizeof(double)));
  }
  if (!out) fail(Errc::io_error, "failed to write checkpoint");
}

ModelParams load_model(std::istream& in) {
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, kModelMagic, 4) != 0)
    fail(Errc::bad_magic, "not a model checkpoint");
  const auto version = read_raw<std::uint32_t>(in, "version");
  if (version != kModelVersion)
    fail(Errc::version_unsupported,
         "checkpoint version " + std::to_string(version));
  const auto arch_tag = read_raw<std::uint32_t>(in, "architecture tag");
  if (arch_tag > 2) fail(Errc::bad_magic, "bad architecture tag");

  const auto echo_len = read_raw<std::uint64_t>(in, "config length");
  std::string echo(echo_len, '\0');
  in.read(echo.data(), static_cast<std::streamsize>(echo_len));
  if (in.gcount() != static_cast<std::streamsize>(echo_len))
    fail(Errc::truncated_payload, "checkpoint ends inside the config echo");

  ModelParams params;
  apply_config_echo(params, echo);
  if (params.arch != static_cast<Arch>(arch_tag))
    fail(Errc::config_error, "architecture tag disagrees with the config echo");
  build_structure(params);

  auto refs = tensor_refs(params);
  const auto count = read_raw<std::uint64_t>(in, "tensor count");
  if (count != refs.size())
    fail(Errc::truncated_payload,
         "checkpoint has " + std::to_string(count) + " tensors, structure needs " +
             std::to_string(refs.size()));
  for (auto& ref : refs) {
    const auto name_len = read_raw<std::uint32_t>(in, "tensor name length");
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (in.gcount() != static_cast<std::streamsize>(name_len) || name != ref.name)
      fail(Errc::truncated_payload, "unexpected tensor '" + name + "'");
    const auto ndim = read_raw<std::uint32_t>(in, "tensor rank");
    std::uint64_t total = 1;
    std::vector<std::uint64_t> shape;
    for (std::uint32_t d = 0; d < ndim; ++d) {
      shape.push_back(read_raw<std::uint64_t>(in, "tensor shape"));
      total *= shape.back();
    }
    if (shape != ref.shape || total != ref.values->size())
      fail(Errc::truncated_payload, "tensor '" + name + "' has the wrong shape");
    in.read(reinterpret_cast<char*>(ref.values->data()),
            static_cast<std::streamsize>(total * sizeof(double)));
    if (in.gcount() != static_cast<std::streamsize>(total * sizeof(double)))
      fail(Errc::truncated_payload, "checkpoint ends inside tensor '" + name + "'");
  }
  for (const auto& ref : refs)
    for (const double v : *ref.values)
      if (!std::isfinite(v))
        fail(Errc::non_finite_value, "checkpoint contains non-finite values");
  return params;
}

void save_model_file(const ModelParams& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::io_error, "cannot open '" + path + "' for writing");
  save_model(params, out);
}

ModelParams load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io_error, "cannot open '" + path + "'");
  return load_model(in);
}

}  // namespace ergoseg
