#include "disent/model.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "disent/error.hpp"

namespace disent {

void MlpSpec::validate() const {
  if (widths.size() < 2) fail(ErrorCode::kParameter, "MlpSpec: need at least one layer");
  for (std::size_t w : widths)
    if (w == 0) fail(ErrorCode::kParameter, "MlpSpec: layer widths must be positive");
  if (!std::isfinite(leaky_slope)) fail(ErrorCode::kParameter, "MlpSpec: non-finite slope");
}

Mlp::Mlp(MlpSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  for (std::size_t l = 0; l < spec_.num_layers(); ++l) {
    layers_.push_back({Matrix(spec_.widths[l], spec_.widths[l + 1]),
                       std::vector<double>(spec_.widths[l + 1], 0.0)});
  }
}

Mlp Mlp::random(MlpSpec spec, Rng& rng) {
  Mlp net(std::move(spec));
  for (auto& layer : net.layers_) {
    const double scale = std::sqrt(2.0 / static_cast<double>(layer.weight.rows()));
    for (double& w : layer.weight.data()) w = scale * rng.normal();
  }
  return net;
}

std::size_t Mlp::num_params() const noexcept {
  std::size_t n = 0;
  for (const auto& layer : layers_) n += layer.weight.size() + layer.bias.size();
  return n;
}

void Mlp::flatten_into(std::vector<double>& out) const {
  for (const auto& layer : layers_) {
    out.insert(out.end(), layer.weight.data().begin(), layer.weight.data().end());
    out.insert(out.end(), layer.bias.begin(), layer.bias.end());
  }
}

std::size_t Mlp::unflatten_from(std::span<const double> in) {
  if (in.size() < num_params()) fail(ErrorCode::kShape, "Mlp::unflatten_from: too few values");
  std::size_t pos = 0;
  for (auto& layer : layers_) {
    for (double& w : layer.weight.data()) w = in[pos++];
    for (double& b : layer.bias) b = in[pos++];
  }
  return pos;
}

Matrix Mlp::forward(const Matrix& x, ForwardTape* tape) const {
  if (x.cols() != input_width()) {
    fail(ErrorCode::kShape, "Mlp::forward: input has " + std::to_string(x.cols()) +
                                " columns, network expects " + std::to_string(input_width()));
  }
  if (tape) {
    tape->inputs.clear();
    tape->pre_activations.clear();
  }
  Matrix act = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    Matrix pre = matmul(act, layer.weight);
    for (std::size_t i = 0; i < pre.rows(); ++i) {
      auto row = pre.row(i);
      for (std::size_t j = 0; j < row.size(); ++j) row[j] += layer.bias[j];
    }
    if (tape) tape->inputs.push_back(std::move(act));
    act = pre;
    if (l + 1 < layers_.size()) {
      for (double& v : act.data())
        if (v < 0.0) v *= spec_.leaky_slope;
    }
    if (tape) tape->pre_activations.push_back(std::move(pre));
  }
  return act;
}

MlpBackward backward(const Mlp& net, const ForwardTape& tape, const Matrix& upstream) {
  const auto& layers = net.layers();
  if (tape.inputs.size() != layers.size() || tape.pre_activations.size() != layers.size()) {
    fail(ErrorCode::kShape, "backward: tape does not match network depth");
  }
  const Matrix& last = tape.pre_activations.back();
  if (upstream.rows() != last.rows() || upstream.cols() != last.cols()) {
    fail(ErrorCode::kShape, "backward: upstream shape does not match network output");
  }
  MlpBackward out{Mlp(net.spec()), Matrix()};
  Matrix delta = upstream;
  for (std::size_t l = layers.size(); l-- > 0;) {
    if (l + 1 < layers.size()) {
      const Matrix& pre = tape.pre_activations[l];
      for (std::size_t k = 0; k < delta.size(); ++k)
        if (pre.data()[k] < 0.0) delta.data()[k] *= net.spec().leaky_slope;
    }
    auto& grad_layer = out.param_grads.layers()[l];
    grad_layer.weight = matmul(transpose(tape.inputs[l]), delta);
    for (std::size_t i = 0; i < delta.rows(); ++i) {
      auto row = delta.row(i);
      for (std::size_t j = 0; j < row.size(); ++j) grad_layer.bias[j] += row[j];
    }
    delta = matmul(delta, transpose(layers[l].weight));
  }
  out.input_grad = std::move(delta);
  return out;
}

ModelParams ModelParams::random(const ModelSpec& spec, Rng& rng) {
  if (spec.encoder.widths.empty() || spec.classifier.widths.empty() ||
      spec.encoder.widths.back() != spec.classifier.widths.front()) {
    fail(ErrorCode::kShape, "ModelParams: classifier input must match encoder output");
  }
  ModelParams params{Mlp::random(spec.encoder, rng), Mlp::random(spec.classifier, rng),
                     std::nullopt};
  if (spec.adversary) {
    if (spec.adversary->widths.front() != spec.encoder.widths.back()) {
      fail(ErrorCode::kShape, "ModelParams: adversary input must match encoder output");
    }
    params.adversary = Mlp::random(*spec.adversary, rng);
  }
  return params;
}

std::size_t ModelParams::num_params() const noexcept {
  return encoder.num_params() + classifier.num_params() +
         (adversary ? adversary->num_params() : 0);
}

std::vector<double> ModelParams::flatten() const {
  std::vector<double> flat;
  flat.reserve(num_params());
  encoder.flatten_into(flat);
  classifier.flatten_into(flat);
  if (adversary) adversary->flatten_into(flat);
  return flat;
}

void ModelParams::unflatten(std::span<const double> flat) {
  if (flat.size() != num_params()) fail(ErrorCode::kShape, "ModelParams::unflatten: size mismatch");
  std::size_t pos = encoder.unflatten_from(flat);
  pos += classifier.unflatten_from(flat.subspan(pos));
  if (adversary) adversary->unflatten_from(flat.subspan(pos));
}

std::pair<Matrix, ForwardTape> encode(const ModelParams& params, const Matrix& x) {
  ForwardTape tape;
  Matrix z = params.encoder.forward(x, &tape);
  return {std::move(z), std::move(tape)};
}

CrossEntropy cross_entropy(const Matrix& logits, std::span<const Label> labels) {
  if (logits.cols() != 2 || logits.rows() != labels.size()) {
    fail(ErrorCode::kShape, "cross_entropy: expected n x 2 logits matching the label count");
  }
  if (labels.empty()) fail(ErrorCode::kShape, "cross_entropy: empty batch");
  const double inv_n = 1.0 / static_cast<double>(labels.size());
  CrossEntropy out{0.0, Matrix(logits.rows(), 2)};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double a = logits(i, 0), b = logits(i, 1);
    const double hi = std::max(a, b);
    const double lse = hi + std::log(std::exp(a - hi) + std::exp(b - hi));
    const double p0 = std::exp(a - lse);
    const double p1 = std::exp(b - lse);
    out.loss += lse - logits(i, labels[i]);
    out.dlogits(i, 0) = (p0 - (labels[i] == 0 ? 1.0 : 0.0)) * inv_n;
    out.dlogits(i, 1) = (p1 - (labels[i] == 1 ? 1.0 : 0.0)) * inv_n;
  }
  out.loss *= inv_n;
  return out;
}

double accuracy(const Matrix& logits, std::span<const Label> labels) {
  if (logits.cols() != 2 || logits.rows() != labels.size()) {
    fail(ErrorCode::kShape, "accuracy: expected n x 2 logits matching the label count");
  }
  if (labels.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const Label pred = logits(i, 1) > logits(i, 0) ? 1 : 0;
    if (pred == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

// ---- checkpoint I/O ----

namespace {

constexpr std::array<char, 8> kMagic = {'D', 'S', 'N', 'T', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kCheckpointVersion = 1;

class Writer {
 public:
  explicit Writer(std::ofstream& os) : os_(os) {}
  template <typename T>
  void put(T v) {
    std::uint64_t bits = 0;
    if constexpr (std::is_same_v<T, double>) {
      bits = std::bit_cast<std::uint64_t>(v);
    } else {
      bits = static_cast<std::uint64_t>(v);
    }
    std::array<char, sizeof(T)> bytes{};
    for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
    os_.write(bytes.data(), bytes.size());
  }

 private:
  std::ofstream& os_;
};

class Reader {
 public:
  Reader(std::ifstream& is, const std::filesystem::path& path) : is_(is), path_(path) {}
  template <typename T>
  T get() {
    std::array<unsigned char, sizeof(T)> bytes{};
    is_.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
    if (!is_) fail(ErrorCode::kParse, "checkpoint " + path_.string() + ": truncated file");
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) bits |= std::uint64_t{bytes[i]} << (8 * i);
    if constexpr (std::is_same_v<T, double>) {
      return std::bit_cast<double>(bits);
    } else {
      return static_cast<T>(bits);
    }
  }

 private:
  std::ifstream& is_;
  const std::filesystem::path& path_;
};

void write_network(Writer& w, std::uint8_t role, const Mlp& net) {
  w.put<std::uint8_t>(role);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(net.spec().widths.size()));
  for (std::size_t width : net.spec().widths) w.put<std::uint64_t>(width);
  w.put<double>(net.spec().leaky_slope);
  for (const auto& layer : net.layers()) {
    for (double v : layer.weight.data()) w.put<double>(v);
    for (double v : layer.bias) w.put<double>(v);
  }
}

}  // namespace

void save_checkpoint(const ModelParams& params, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) fail(ErrorCode::kIo, "save_checkpoint: cannot open " + path.string());
  os.write(kMagic.data(), kMagic.size());
  Writer w(os);
  w.put<std::uint32_t>(kCheckpointVersion);
  w.put<std::uint32_t>(params.adversary ? 3 : 2);
  write_network(w, 0, params.encoder);
  write_network(w, 1, params.classifier);
  if (params.adversary) write_network(w, 2, *params.adversary);
  if (!os) fail(ErrorCode::kIo, "save_checkpoint: write failed for " + path.string());
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::kIo, "load_checkpoint: cannot open " + path.string());
  std::array<char, 8> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kMagic) fail(ErrorCode::kParse, "checkpoint " + path.string() + ": bad magic");
  Reader r(is, path);
  if (r.get<std::uint32_t>() != kCheckpointVersion) {
    fail(ErrorCode::kParse, "checkpoint " + path.string() + ": unsupported version");
  }
  const auto count = r.get<std::uint32_t>();
  if (count < 2 || count > 3) fail(ErrorCode::kParse, "checkpoint " + path.string() + ": bad network count");
  ModelParams params;
  for (std::uint32_t n = 0; n < count; ++n) {
    const auto role = r.get<std::uint8_t>();
    if (role != n) fail(ErrorCode::kParse, "checkpoint " + path.string() + ": networks out of order");
    MlpSpec spec;
    const auto width_count = r.get<std::uint32_t>();
    if (width_count < 2 || width_count > 64) {
      fail(ErrorCode::kParse, "checkpoint " + path.string() + ": bad layer count");
    }
    for (std::uint32_t i = 0; i < width_count; ++i) {
      const auto width = r.get<std::uint64_t>();
      if (width == 0 || width > (1u << 20)) {
        fail(ErrorCode::kParse, "checkpoint " + path.string() + ": bad layer width");
      }
      spec.widths.push_back(static_cast<std::size_t>(width));
    }
    spec.leaky_slope = r.get<double>();
    Mlp net(std::move(spec));
    for (auto& layer : net.layers()) {
      for (double& v : layer.weight.data()) v = r.get<double>();
      for (double& v : layer.bias) v = r.get<double>();
    }
    if (n == 0) params.encoder = std::move(net);
    else if (n == 1) params.classifier = std::move(net);
    else params.adversary = std::move(net);
  }
  if (is.peek() != std::char_traits<char>::eof()) {
    fail(ErrorCode::kParse, "checkpoint " + path.string() + ": trailing bytes");
  }
  return params;
}

}  // namespace disent
