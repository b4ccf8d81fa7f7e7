// Copyright 2026 The fetchproj Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FETCHPROJ__CORE_HPP_
#define FETCHPROJ__CORE_HPP_

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fetchproj
{

inline constexpr double kPi = 3.14159265358979323846;

/// Wraps an angle into (-pi, pi].
double normalize_angle(double angle);

/// Planar pose in the map frame (meters, radians).
struct Pose2D
{
  double x{0.0};
  double y{0.0};
  double theta{0.0};

  bool operator==(const Pose2D &) const = default;
};

/// 2.5D pose: position plus heading about the vertical axis.
struct Pose3D
{
  double x{0.0};
  double y{0.0};
  double z{0.0};
  double yaw{0.0};

  bool operator==(const Pose3D &) const = default;
};

Pose2D make_pose2d(double x, double y, double theta);
Pose3D make_pose3d(double x, double y, double z, double yaw);

double planar_distance(const Pose2D & a, const Pose2D & b);
double planar_distance(const Pose3D & a, const Pose3D & b);
double distance3d(const Pose3D & a, const Pose3D & b);

enum class Arm { left, right };
enum class GraspType { front, back, top };

std::string_view to_string(Arm arm);
std::string_view to_string(GraspType grasp);
std::optional<Arm> parse_arm(std::string_view text);
std::optional<GraspType> parse_grasp(std::string_view text);

/// Thrown when an operation receives arguments that violate its contract.
class InvalidArgument : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/// Deterministic random stream. The raw engine output is fixed by the
/// standard, and the distribution transforms are implemented here so that a
/// seed produces the same values on every standard library.
class Rng
{
public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  /// Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi);
  /// Uniform integer in [0, n). n must be positive.
  std::size_t index(std::size_t n);
  bool bernoulli(double p);
  double normal(double mean, double sigma);

private:
  std::mt19937_64 engine_;
};

/// Stable 64-bit mix of (master, index) used to derive independent streams.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace fetchproj

#endif  // FETCHPROJ__CORE_HPP_
