#pragma once

// Per-subject mapping from optical-axis direction to visual-axis direction,
// learned from calibration frames. Two schemes: a second-order polynomial
// in gaze angles and a small fully connected residual network.

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <variant>
#include <vector>

#include "glintgaze/gaze_pipeline.hpp"

namespace glintgaze {

struct CalibrationPair {
  Vector3d optical;  // device frame, unit
  Vector3d visual;   // device frame, unit
};

using CalibrationSet = std::vector<CalibrationPair>;

// ---------------------------------------------------------------------------
// Polynomial mapper

inline constexpr int kPolyTerms = 6;
inline constexpr std::size_t kMinPolyPairs = 6;

/// Basis [1, h, v, h^2, h v, v^2] over (horizontal, vertical) angles in
/// radians. Row 0 predicts the horizontal output angle, row 1 the vertical.
struct PolyMapper {
  Eigen::Matrix<double, 2, kPolyTerms> coefficients =
      Eigen::Matrix<double, 2, kPolyTerms>::Zero();
  GazeFrameSpec frame;

  static PolyMapper identity(const GazeFrameSpec& frame = {});
};

Eigen::Matrix<double, kPolyTerms, 1> poly_basis(const GazeAngles& angles);

/// Least-squares fit through the normal equations, per output channel.
PolyMapper fit_polynomial(const CalibrationSet& cal, const GazeFrameSpec& frame);

Vector3d apply_polynomial(const PolyMapper& mapper, const Vector3d& optical,
                          const GazeFrameSpec& frame);
inline Vector3d apply_polynomial(const PolyMapper& mapper, const Vector3d& optical) {
  return apply_polynomial(mapper, optical, mapper.frame);
}

// ---------------------------------------------------------------------------
// Dense network mapper

inline constexpr std::array<int, 6> kDenseWidths{3, 64, 96, 96, 64, 3};
inline constexpr int kDenseLayers = static_cast<int>(kDenseWidths.size()) - 1;

struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;     // out
};

/// Fully connected 3-64-96-96-64-3 network with rectifier activations on the
/// hidden layers. The layers see the standardized input
/// (x - input_mean) / input_scale; with `residual` set the output is
/// normalize(x + f(x)).
struct DenseGazeNet {
  std::vector<DenseLayer> layers;
  bool residual = true;
  /// Fixed (non-trainable) input standardization.
  Vector3d input_mean = Vector3d::Zero();
  double input_scale = 1.0;

  std::size_t parameter_count() const;
  Eigen::VectorXd parameters() const;
  void set_parameters(const Eigen::VectorXd& flat);
};

/// Fan-in scaled uniform hidden weights, zero biases, zero final layer: the
/// fresh network is the identity map.
DenseGazeNet net_init(std::uint64_t seed);

/// Unnormalized output x + f(x) (or f(x) without the residual flag) for a
/// batch of column vectors.
Eigen::Matrix3Xd net_raw_output(const DenseGazeNet& net, const Eigen::Matrix3Xd& inputs);

Vector3d net_forward(const DenseGazeNet& net, const Vector3d& optical);

/// Mean over pairs of the squared distance between the unnormalized output
/// and the unit target, plus weight_decay/2 times the squared weight norm.
/// Fills `gradient` (same layout as DenseGazeNet::parameters) when given.
double net_loss(const DenseGazeNet& net, const CalibrationSet& cal, double weight_decay,
                Eigen::VectorXd* gradient = nullptr);

struct TrainHyper {
  int epochs = 2000;
  double learning_rate = 0.03;
  double momentum = 0.5;
  double weight_decay = 1e-4;
  /// Reset the input standardization to the calibration inputs' mean and
  /// RMS spread before training.
  bool fit_input_normalization = true;
};

struct TrainResult {
  DenseGazeNet net;
  std::vector<double> loss_curve;  // loss before each epoch, then the final loss
};

/// Full-batch gradient descent with heavy-ball momentum on a private copy of
/// `net`.
TrainResult net_train(const DenseGazeNet& net, const CalibrationSet& cal,
                      const TrainHyper& hyper = {});

// ---------------------------------------------------------------------------
// Either mapper, plus a versioned text serialization.

using GazeMapper = std::variant<PolyMapper, DenseGazeNet>;

Vector3d apply_mapper(const GazeMapper& mapper, const Vector3d& optical);

/// Layout (whitespace separated, one record per line):
///   glintgaze-mapper 1
///   scheme poly|dense
///   poly:  frame <ox oy oz rx ry rz>
///          coefficients 2 6 followed by 2 lines of 6 values
///   dense: residual 0|1
///          input <mx my mz scale>
///          layers N, then per layer "layer <out> <in>", <out> weight rows,
///          and one bias line
/// Values are printed with 17 significant digits, which round-trips doubles
/// exactly.
void save_mapper(std::ostream& out, const GazeMapper& mapper);
GazeMapper load_mapper(std::istream& in);

}  // namespace glintgaze
