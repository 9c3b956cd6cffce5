#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "ergoseg/features.hpp"
#include "ergoseg/matrix.hpp"
#include "ergoseg/rng.hpp"

namespace ergoseg {

enum class Arch { ed_tcn, d_tcn, framewise };

const char* arch_name(Arch arch);
Arch parse_arch(const std::string& name);

enum class FilterDurationMode { fixed_seconds, shortest_class_mean };

struct EdTcnConfig {
  std::vector<int> encoder_filters{64, 96};
  double filter_duration_s = 10.0;
  FilterDurationMode filter_mode = FilterDurationMode::fixed_seconds;
  double learning_rate = 0.001;
  int epochs = 500;
  // optimizer: RMSProp (decay 0.9, eps 1e-8)
};

struct DTcnConfig {
  int stacks = 5;
  int layers_per_stack = 3;
  std::vector<int> filters_per_layer{32, 64, 96};
  double learning_rate = 0.001;
  int epochs = 500;
  // optimizer: Adam (beta1 0.9, beta2 0.999, eps 1e-8)
};

struct FramewiseConfig {
  double learning_rate = 0.001;
  int epochs = 500;
};

// Temporal convolution parameters; weights indexed [tap][in_ch][out_ch].
struct ConvParams {
  int width = 1;
  int in_ch = 0;
  int out_ch = 0;
  int dilation = 1;
  bool causal = false;  // centered (odd width) when false
  std::vector<double> w;
  std::vector<double> b;
};

struct ModelParams {
  Arch arch = Arch::framewise;
  int n_classes = 0;
  int input_dims = 0;
  double fps_at_train = 0.0;
  int filter_width = 1;  // ed_tcn conv width in frames

  EdTcnConfig ed;
  DTcnConfig dt;
  FramewiseConfig fw;

  std::vector<ConvParams> encoder;  // ed_tcn
  std::vector<ConvParams> decoder;  // ed_tcn
  struct DilatedLayer {
    ConvParams gate;     // width 2, causal, 2*C outputs
    ConvParams in_proj;  // 1x1 residual path for the layer input
    ConvParams res;      // 1x1 from gated output back to the trunk
    ConvParams skip;     // 1x1 into the summed skip head
  };
  std::vector<DilatedLayer> dilated;  // d_tcn
  ConvParams head;                    // final projection to classes

  int encoder_depth() const { return static_cast<int>(encoder.size()); }
  int pool_factor() const { return 1 << encoder_depth(); }
};

struct TrainReport {
  std::vector<double> epoch_loss;
  std::vector<double> epoch_accuracy;  // on the validation set if given
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
};

struct TrainSpec {
  Arch arch = Arch::ed_tcn;
  EdTcnConfig ed;
  DTcnConfig dt;
  FramewiseConfig fw;
};

// --- layer primitives (exposed for verification) ---

// Same-length zero-padded temporal convolution; effective receptive width is
// 1 + (width-1) * dilation.
Matrix conv1d(const Matrix& input, const ConvParams& p);
// Accumulates into grad_in / grad_p (shapes must already match).
void conv1d_backward(const Matrix& input, const ConvParams& p,
                     const Matrix& grad_out, Matrix* grad_in,
                     ConvParams* grad_p);

Matrix maxpool2(const Matrix& input, std::vector<std::uint32_t>* argmax);
Matrix maxpool2_backward(const Matrix& grad_out,
                         const std::vector<std::uint32_t>& argmax,
                         std::size_t input_rows);
Matrix upsample2(const Matrix& input);
Matrix upsample2_backward(const Matrix& grad_out);
Matrix relu(const Matrix& input);
Matrix relu_backward(const Matrix& output, const Matrix& grad_out);
// tanh(a) * sigmoid(b) over the two channel halves (2C -> C).
Matrix gated(const Matrix& pre);
Matrix gated_backward(const Matrix& pre, const Matrix& grad_out);
void softmax_rows(Matrix& m);
// Mean cross-entropy over the first n_real rows; optional gradient wrt the
// logits (rows past n_real stay zero).
double cross_entropy(const Matrix& probs, const std::vector<int>& labels,
                     std::size_t n_real, Matrix* grad_logits);

// --- model structure ---

// Allocates zero-valued tensors according to arch and the config echo fields.
void build_structure(ModelParams& params);
ModelParams init_model(const TrainSpec& spec, int n_classes, int input_dims,
                       double fps, std::uint64_t seed,
                       const Dataset* filter_duration_source = nullptr);

struct TensorRef {
  std::string name;
  std::vector<double>* values;
  std::vector<std::uint64_t> shape;
};
std::vector<TensorRef> tensor_refs(ModelParams& params);

// --- forward / loss / training ---

Matrix ed_tcn_forward(const ModelParams& params, const Matrix& features);
Matrix d_tcn_forward(const ModelParams& params, const Matrix& features);
Matrix framewise_forward(const ModelParams& params, const Matrix& features);
Matrix model_forward(const ModelParams& params, const Matrix& features);

double model_loss(const ModelParams& params, const Matrix& features,
                  const std::vector<int>& labels);
double model_loss_and_grads(const ModelParams& params, const Matrix& features,
                            const std::vector<int>& labels, ModelParams* grads);

std::pair<ModelParams, TrainReport> train(const Dataset& data,
                                          const TrainSpec& spec,
                                          std::uint64_t seed,
                                          const Dataset* validation = nullptr);

std::vector<int> predict(const ModelParams& params, const Matrix& features);

// Windowed prediction with the streaming padding rule applied per window.
std::vector<int> predict_windowed(const ModelParams& params,
                                  const Matrix& features, int window);

// Incremental windowed prediction. Frames may arrive in any chunking; each
// completed window (and the final partial window, padded by repeating its
// last frame) is segmented independently.
class StreamingPredictor {
 public:
  StreamingPredictor(const ModelParams& model, int window);

  void push(const double* frame, std::size_t dims);
  void push(const Matrix& frames);
  void finish();
  std::vector<int> drain();

 private:
  void flush(std::size_t n_real);

  const ModelParams& model_;
  int window_;
  Matrix buffer_;
  std::size_t buffered_ = 0;
  std::vector<int> emitted_;
};

// Binary "TCNM" checkpoint; load(save(m)) is bit-exact.
void save_model(const ModelParams& params, std::ostream& out);
ModelParams load_model(std::istream& in);
void save_model_file(const ModelParams& params, const std::string& path);
ModelParams load_model_file(const std::string& path);

}  // namespace ergoseg
