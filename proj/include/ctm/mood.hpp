#pragma once

namespace ctm {

/// Shifts a weight by Delta*|w| in the direction of the current mood:
/// w + sign(mood) * delta * |w|. Zero mood leaves w unchanged.
double mood_modulate(double w, double current_mood, double delta);

/// Sign for a weight whose behavior has no opinion: that of the current mood,
/// positive when the mood is zero.
double unclear_sign(double current_mood);

} // namespace ctm
