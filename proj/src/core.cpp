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

#include "fetchproj/core.hpp"

#include <cmath>

namespace fetchproj
{

double normalize_angle(double angle)
{
  if (!std::isfinite(angle)) {
    throw InvalidArgument("angle must be finite");
  }
  double a = std::fmod(angle, 2.0 * kPi);
  if (a <= -kPi) {
    a += 2.0 * kPi;
  } else if (a > kPi) {
    a -= 2.0 * kPi;
  }
  return a;
}

Pose2D make_pose2d(double x, double y, double theta)
{
  return Pose2D{x, y, normalize_angle(theta)};
}

Pose3D make_pose3d(double x, double y, double z, double yaw)
{
  return Pose3D{x, y, z, normalize_angle(yaw)};
}

double planar_distance(const Pose2D & a, const Pose2D & b)
{
  return std::hypot(a.x - b.x, a.y - b.y);
}

double planar_distance(const Pose3D & a, const Pose3D & b)
{
  return std::hypot(a.x - b.x, a.y - b.y);
}

double distance3d(const Pose3D & a, const Pose3D & b)
{
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

std::string_view to_string(Arm arm)
{
  return arm == Arm::left ? "left" : "right";
}

std::string_view to_string(GraspType grasp)
{
  switch (grasp) {
    case GraspType::front: return "front";
    case GraspType::back: return "back";
    case GraspType::top: return "top";
  }
  return "unknown";
}

std::optional<Arm> parse_arm(std::string_view text)
{
  if (text == "left") {return Arm::left;}
  if (text == "right") {return Arm::right;}
  return std::nullopt;
}

std::optional<GraspType> parse_grasp(std::string_view text)
{
  if (text == "front") {return GraspType::front;}
  if (text == "back") {return GraspType::back;}
  if (text == "top") {return GraspType::top;}
  return std::nullopt;
}

Rng::Rng(std::uint64_t seed)
: engine_(seed)
{
}

std::uint64_t Rng::next_u64()
{
  return engine_();
}

double Rng::uniform()
{
  // 53 high bits -> [0, 1)
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi)
{
  return lo + (hi - lo) * uniform();
}

std::size_t Rng::index(std::size_t n)
{
  if (n == 0) {
    throw InvalidArgument("Rng::index requires n > 0");
  }
  // Rejection sampling keeps the result unbiased.
  const std::uint64_t bound = n;
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  std::uint64_t v = next_u64();
  while (v >= limit) {
    v = next_u64();
  }
  return static_cast<std::size_t>(v % bound);
}

bool Rng::bernoulli(double p)
{
  if (p <= 0.0) {
    return false;
  }
  if (p >= 1.0) {
    return true;
  }
  return uniform() < p;
}

double Rng::normal(double mean, double sigma)
{
  if (sigma <= 0.0) {
    return mean;
  }
  // Box-Muller; one draw per call keeps the stream position easy to reason about.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return mean + sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

namespace
{
std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index)
{
  return splitmix64(splitmix64(master) ^ (index * 0xd1342543de82ef95ULL + 1));
}

}  // namespace fetchproj
