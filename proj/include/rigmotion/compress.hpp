#pragma once

// Keyframe reduction.
//
// Per track, keys are split top-down: starting from the first and last key,
// the interior key that the slerp (or lerp) between the segment ends
// reproduces worst is kept whenever its deviation exceeds `tolerance`
// (radians of rotation, or scene units of translation), and both halves are
// processed the same way. The error at every original key time is bounded by
// the tolerance, and a larger tolerance keeps a subset of the keys with an
// error that is never smaller.

#include <vector>

#include "rigmotion/clip.hpp"

namespace rigmotion {

std::vector<RotationKey> reduce_rotation_keys(const std::vector<RotationKey>& keys, double tolerance);
std::vector<TranslationKey> reduce_translation_keys(const std::vector<TranslationKey>& keys,
                                                    double tolerance);

// Tracks are reduced in parallel. Throws Error("InvalidArgument") for a
// negative or non-finite tolerance.
Clip compress(const Clip& clip, double tolerance);

// Largest deviation, over every key time of `original`, between `original`
// and `reduced` sampled by interpolation. Rotations contribute geodesic
// angles, translations Euclidean distances.
double reconstruction_error(const Clip& original, const Clip& reduced);

namespace reference {

// Single-threaded compress(), kept as the baseline for tests and benchmarks.
Clip compress(const Clip& clip, double tolerance);

}  // namespace reference
}  // namespace rigmotion
