#include "glintgaze/gaze_mapper.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <random>
#include <string>

namespace glintgaze {

// ---------------------------------------------------------------------------
// Polynomial mapper

PolyMapper PolyMapper::identity(const GazeFrameSpec& frame) {
  PolyMapper m;
  m.coefficients(0, 1) = 1.0;
  m.coefficients(1, 2) = 1.0;
  m.frame = frame;
  return m;
}

Eigen::Matrix<double, kPolyTerms, 1> poly_basis(const GazeAngles& a) {
  Eigen::Matrix<double, kPolyTerms, 1> phi;
  phi << 1.0, a.horizontal, a.vertical, a.horizontal * a.horizontal,
      a.horizontal * a.vertical, a.vertical * a.vertical;
  return phi;
}

PolyMapper fit_polynomial(const CalibrationSet& cal, const GazeFrameSpec& frame) {
  if (cal.size() < kMinPolyPairs) {
    throw GazeError(ErrorCode::kUnderdetermined,
                    "polynomial fit needs >= 6 pairs, got " + std::to_string(cal.size()));
  }
  Eigen::Matrix<double, kPolyTerms, kPolyTerms> normal =
      Eigen::Matrix<double, kPolyTerms, kPolyTerms>::Zero();
  Eigen::Matrix<double, kPolyTerms, 2> rhs = Eigen::Matrix<double, kPolyTerms, 2>::Zero();
  for (const auto& pair : cal) {
    const auto phi = poly_basis(to_angles(pair.optical, frame));
    const GazeAngles out = to_angles(pair.visual, frame);
    normal.noalias() += phi * phi.transpose();
    rhs.col(0) += out.horizontal * phi;
    rhs.col(1) += out.vertical * phi;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, kPolyTerms, kPolyTerms>> eig(
      normal, Eigen::EigenvaluesOnly);
  const double hi = eig.eigenvalues().maxCoeff();
  const double lo = eig.eigenvalues().minCoeff();
  if (!(hi > 0.0) || !(lo > 1e-14 * hi)) {
    throw GazeError(ErrorCode::kSingularBasis, "calibration inputs do not span the basis");
  }
  const Eigen::Matrix<double, kPolyTerms, 2> solution = normal.ldlt().solve(rhs);
  PolyMapper m;
  m.coefficients = solution.transpose();
  m.frame = frame;
  return m;
}

Vector3d apply_polynomial(const PolyMapper& mapper, const Vector3d& optical,
                          const GazeFrameSpec& frame) {
  const auto phi = poly_basis(to_angles(optical, frame));
  const Eigen::Vector2d out = mapper.coefficients * phi;
  return from_angles({out.x(), out.y()}, frame);
}

// ---------------------------------------------------------------------------
// Dense network

std::size_t DenseGazeNet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers) {
    n += static_cast<std::size_t>(layer.weights.size() + layer.bias.size());
  }
  return n;
}

Eigen::VectorXd DenseGazeNet::parameters() const {
  Eigen::VectorXd flat(static_cast<Eigen::Index>(parameter_count()));
  Eigen::Index offset = 0;
  for (const auto& layer : layers) {
    flat.segment(offset, layer.weights.size()) = layer.weights.reshaped();
    offset += layer.weights.size();
    flat.segment(offset, layer.bias.size()) = layer.bias;
    offset += layer.bias.size();
  }
  return flat;
}

void DenseGazeNet::set_parameters(const Eigen::VectorXd& flat) {
  Eigen::Index offset = 0;
  for (auto& layer : layers) {
    layer.weights.reshaped() = flat.segment(offset, layer.weights.size());
    offset += layer.weights.size();
    layer.bias = flat.segment(offset, layer.bias.size());
    offset += layer.bias.size();
  }
}

DenseGazeNet net_init(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  DenseGazeNet net;
  net.residual = true;
  for (int l = 0; l < kDenseLayers; ++l) {
    const int in = kDenseWidths[static_cast<std::size_t>(l)];
    const int out = kDenseWidths[static_cast<std::size_t>(l + 1)];
    DenseLayer layer{Eigen::MatrixXd::Zero(out, in), Eigen::VectorXd::Zero(out)};
    if (l + 1 < kDenseLayers) {
      const double limit = std::sqrt(6.0 / in);
      std::uniform_real_distribution<double> dist(-limit, limit);
      // Column-major fill keeps the draw order tied to the parameter layout.
      for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) {
        for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) layer.weights(i, j) = dist(rng);
      }
    }
    net.layers.push_back(std::move(layer));
  }
  return net;
}

namespace {

struct ForwardCache {
  std::vector<Eigen::MatrixXd> activations;  // input to each layer
  std::vector<Eigen::MatrixXd> pre;          // pre-activation of each layer
  Eigen::Matrix3Xd output;                   // unnormalized
};

ForwardCache forward_batch(const DenseGazeNet& net, const Eigen::Matrix3Xd& inputs) {
  ForwardCache cache;
  Eigen::MatrixXd a = (inputs.colwise() - net.input_mean) / net.input_scale;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    Eigen::MatrixXd z = layer.weights * a;
    z.colwise() += layer.bias;
    cache.activations.push_back(a);
    cache.pre.push_back(z);
    a = l + 1 < net.layers.size() ? Eigen::MatrixXd(z.cwiseMax(0.0)) : z;
  }
  cache.output = net.residual ? Eigen::Matrix3Xd(inputs + a) : Eigen::Matrix3Xd(a);
  return cache;
}

}  // namespace

Eigen::Matrix3Xd net_raw_output(const DenseGazeNet& net, const Eigen::Matrix3Xd& inputs) {
  return forward_batch(net, inputs).output;
}

Vector3d net_forward(const DenseGazeNet& net, const Vector3d& optical) {
  const Vector3d raw = net_raw_output(net, optical).col(0);
  // A vanishing correction returns the input untouched rather than
  // renormalizing it.
  if (net.residual && raw == optical) return optical;
  const double norm = raw.norm();
  if (!(norm >= 1e-9)) {
    throw GazeError(ErrorCode::kDegenerateOutput, "network output has vanishing magnitude");
  }
  return raw / norm;
}

double net_loss(const DenseGazeNet& net, const CalibrationSet& cal, double weight_decay,
                Eigen::VectorXd* gradient) {
  if (cal.empty()) throw GazeError(ErrorCode::kEmptyInput, "empty calibration set");
  const Eigen::Index n = static_cast<Eigen::Index>(cal.size());
  Eigen::Matrix3Xd inputs(3, n);
  Eigen::Matrix3Xd targets(3, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    inputs.col(i) = cal[static_cast<std::size_t>(i)].optical;
    targets.col(i) = cal[static_cast<std::size_t>(i)].visual;
  }
  const ForwardCache cache = forward_batch(net, inputs);
  const Eigen::Matrix3Xd diff = cache.output - targets;
  double weight_norm = 0.0;
  for (const auto& layer : net.layers) weight_norm += layer.weights.squaredNorm();
  const double loss = diff.squaredNorm() / static_cast<double>(n) + 0.5 * weight_decay * weight_norm;
  if (gradient == nullptr) return loss;

  gradient->resize(static_cast<Eigen::Index>(net.parameter_count()));
  // Offsets of each layer's block in the flat layout.
  std::vector<Eigen::Index> offsets;
  Eigen::Index offset = 0;
  for (const auto& layer : net.layers) {
    offsets.push_back(offset);
    offset += layer.weights.size() + layer.bias.size();
  }

  // The residual skip connection passes the upstream gradient unchanged.
  Eigen::MatrixXd delta = (2.0 / static_cast<double>(n)) * diff;
  for (std::size_t l = net.layers.size(); l-- > 0;) {
    const auto& layer = net.layers[l];
    const Eigen::MatrixXd grad_w =
        delta * cache.activations[l].transpose() + weight_decay * layer.weights;
    const Eigen::VectorXd grad_b = delta.rowwise().sum();
    gradient->segment(offsets[l], layer.weights.size()) = grad_w.reshaped();
    gradient->segment(offsets[l] + layer.weights.size(), layer.bias.size()) = grad_b;
    if (l == 0) break;
    Eigen::MatrixXd upstream = layer.weights.transpose() * delta;
    const Eigen::MatrixXd& z = cache.pre[l - 1];
    delta = upstream.cwiseProduct((z.array() > 0.0).cast<double>().matrix());
  }
  return loss;
}

TrainResult net_train(const DenseGazeNet& net, const CalibrationSet& cal,
                      const TrainHyper& hyper) {
  if (cal.empty()) throw GazeError(ErrorCode::kEmptyInput, "empty calibration set");
  TrainResult result{net, {}};
  if (hyper.fit_input_normalization) {
    Vector3d mean = Vector3d::Zero();
    for (const auto& pair : cal) mean += pair.optical;
    mean /= static_cast<double>(cal.size());
    double spread = 0.0;
    for (const auto& pair : cal) spread += (pair.optical - mean).squaredNorm();
    spread = std::sqrt(spread / static_cast<double>(cal.size()));
    result.net.input_mean = mean;
    result.net.input_scale = spread > 1e-6 ? spread : 1.0;
  }
  result.loss_curve.reserve(static_cast<std::size_t>(hyper.epochs) + 1);

  Eigen::VectorXd params = result.net.parameters();
  Eigen::VectorXd velocity = Eigen::VectorXd::Zero(params.size());
  Eigen::VectorXd grad;
  double initial = 0.0;
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    result.net.set_parameters(params);
    const double loss = net_loss(result.net, cal, hyper.weight_decay, &grad);
    if (epoch == 0) initial = loss;
    if (!std::isfinite(loss) || loss > 10.0 * initial) {
      throw GazeError(ErrorCode::kDivergedTraining,
                      "loss " + std::to_string(loss) + " at epoch " + std::to_string(epoch));
    }
    result.loss_curve.push_back(loss);
    velocity = hyper.momentum * velocity - hyper.learning_rate * grad;
    params += velocity;
  }
  result.net.set_parameters(params);
  result.loss_curve.push_back(net_loss(result.net, cal, hyper.weight_decay));
  if (hyper.epochs > 0 && (!std::isfinite(result.loss_curve.back()) ||
                           result.loss_curve.back() > 10.0 * initial)) {
    throw GazeError(ErrorCode::kDivergedTraining, "final loss diverged");
  }
  return result;
}

// ---------------------------------------------------------------------------

Vector3d apply_mapper(const GazeMapper& mapper, const Vector3d& optical) {
  if (const auto* poly = std::get_if<PolyMapper>(&mapper)) return apply_polynomial(*poly, optical);
  return net_forward(std::get<DenseGazeNet>(mapper), optical);
}

namespace {

constexpr const char* kMagic = "glintgaze-mapper";
constexpr int kFormatVersion = 1;

void write_value(std::ostream& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out << buf;
}

template <typename Derived>
void write_row(std::ostream& out, const Eigen::DenseBase<Derived>& row) {
  for (Eigen::Index j = 0; j < row.size(); ++j) {
    if (j > 0) out << ' ';
    write_value(out, row(j));
  }
  out << '\n';
}

std::string next_token(std::istream& in) {
  std::string token;
  if (!(in >> token)) throw GazeError(ErrorCode::kParseError, "unexpected end of mapper file");
  return token;
}

void expect(std::istream& in, const std::string& keyword) {
  const std::string token = next_token(in);
  if (token != keyword) {
    throw GazeError(ErrorCode::kParseError, "expected '" + keyword + "', got '" + token + "'");
  }
}

double read_double(std::istream& in) {
  const std::string token = next_token(in);
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0') {
    throw GazeError(ErrorCode::kParseError, "bad number '" + token + "'");
  }
  return v;
}

long read_int(std::istream& in) {
  const std::string token = next_token(in);
  char* end = nullptr;
  const long v = std::strtol(token.c_str(), &end, 10);
  if (end == token.c_str() || *end != '\0') {
    throw GazeError(ErrorCode::kParseError, "bad integer '" + token + "'");
  }
  return v;
}

}  // namespace

void save_mapper(std::ostream& out, const GazeMapper& mapper) {
  out << kMagic << ' ' << kFormatVersion << '\n';
  if (const auto* poly = std::get_if<PolyMapper>(&mapper)) {
    out << "scheme poly\nframe ";
    Eigen::Matrix<double, 6, 1> frame;
    frame << poly->frame.origin, poly->frame.reference_dir;
    write_row(out, frame);
    out << "coefficients 2 " << kPolyTerms << '\n';
    for (int r = 0; r < 2; ++r) write_row(out, poly->coefficients.row(r));
    return;
  }
  const auto& net = std::get<DenseGazeNet>(mapper);
  out << "scheme dense\nresidual " << (net.residual ? 1 : 0) << "\ninput ";
  Eigen::Vector4d input;
  input << net.input_mean, net.input_scale;
  write_row(out, input);
  out << "layers " << net.layers.size() << '\n';
  for (const auto& layer : net.layers) {
    out << "layer " << layer.weights.rows() << ' ' << layer.weights.cols() << '\n';
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) write_row(out, layer.weights.row(r));
    write_row(out, layer.bias.transpose());
  }
}

GazeMapper load_mapper(std::istream& in) {
  expect(in, kMagic);
  if (read_int(in) != kFormatVersion) {
    throw GazeError(ErrorCode::kParseError, "unsupported mapper format version");
  }
  expect(in, "scheme");
  const std::string scheme = next_token(in);
  if (scheme == "poly") {
    PolyMapper poly;
    expect(in, "frame");
    for (int i = 0; i < 3; ++i) poly.frame.origin[i] = read_double(in);
    for (int i = 0; i < 3; ++i) poly.frame.reference_dir[i] = read_double(in);
    expect(in, "coefficients");
    if (read_int(in) != 2 || read_int(in) != kPolyTerms) {
      throw GazeError(ErrorCode::kParseError, "polynomial mapper must be 2 x 6");
    }
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < kPolyTerms; ++c) poly.coefficients(r, c) = read_double(in);
    }
    return poly;
  }
  if (scheme != "dense") throw GazeError(ErrorCode::kParseError, "unknown scheme " + scheme);

  DenseGazeNet net;
  expect(in, "residual");
  net.residual = read_int(in) != 0;
  expect(in, "input");
  for (int i = 0; i < 3; ++i) net.input_mean[i] = read_double(in);
  net.input_scale = read_double(in);
  if (!(net.input_scale > 0.0)) throw GazeError(ErrorCode::kParseError, "bad input scale");
  expect(in, "layers");
  const long count = read_int(in);
  if (count < 1 || count > 64) throw GazeError(ErrorCode::kParseError, "bad layer count");
  for (long l = 0; l < count; ++l) {
    expect(in, "layer");
    const long rows = read_int(in);
    const long cols = read_int(in);
    if (rows < 1 || cols < 1 || rows > 4096 || cols > 4096) {
      throw GazeError(ErrorCode::kParseError, "bad layer shape");
    }
    DenseLayer layer{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(rows)};
    for (long r = 0; r < rows; ++r) {
      for (long c = 0; c < cols; ++c) layer.weights(r, c) = read_double(in);
    }
    for (long r = 0; r < rows; ++r) layer.bias(r) = read_double(in);
    if (!net.layers.empty() && net.layers.back().weights.rows() != cols) {
      throw GazeError(ErrorCode::kParseError, "layer shapes do not chain");
    }
    net.layers.push_back(std::move(layer));
  }
  if (net.layers.front().weights.cols() != 3 || net.layers.back().weights.rows() != 3) {
    throw GazeError(ErrorCode::kParseError, "dense mapper must map 3 -> 3");
  }
  return net;
}

}  // namespace glintgaze
