#pragma once

namespace bubble {

// world scale: lengths in px, time in seconds, y axis points down,
// gravity acts along +y
inline constexpr double kDt = 1.0 / 60.0;
inline constexpr double kGravity = 980.0;
inline constexpr double kDensity = 1.0;

inline constexpr double kRestitutionWood = 0.4;
inline constexpr double kRestitutionMetal = 0.6;
// the ball carries no spin state, so impacts keep a fixed fraction of the
// tangential velocity instead of resolving Coulomb slip
inline constexpr double kTangentialRetention = 0.9;
// Coulomb coefficient for block contacts and the roll/slide cone
inline constexpr double kFrictionBall = 0.3;
inline constexpr double kFrictionBlock = 0.3;
inline constexpr double kRollingResist = 20.0;  // px/s^2

// normal approach speed separating a bounce from rolling capture
inline constexpr double kBounceSpeedThreshold = 30.0;  // px/s
// tangential speed below which a rolling ball counts as at rest
inline constexpr double kRestSpeedThreshold = 2.0;  // px/s

}  // namespace bubble
