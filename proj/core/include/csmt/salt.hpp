#pragma once

#include "csmt/digest.hpp"

#include <array>
#include <compare>

namespace csmt {

/// Salt width in bytes, fixed per deployment (128-bit entropy).
inline constexpr std::size_t kSaltLen = 16;

using SaltBytes = std::array<std::uint8_t, kSaltLen>;

/// Secret salt binding a user's identity to their datum.
struct UserSalt {
    SaltBytes bytes{};
    auto operator<=>(const UserSalt&) const = default;
};

/// Secret salt appended to a leaf transform output to make leaves
/// distinguishable across the user set.
struct TransformSalt {
    SaltBytes bytes{};
    auto operator<=>(const TransformSalt&) const = default;
};

UserSalt random_user_salt();
TransformSalt random_transform_salt();

/// H^tau: digest of the raw salt bytes.
Digest256 tau_digest(const TransformSalt& tau);

/// H^(delta,mu): digest of the canonical record [delta as doubles, mu].
Digest256 record_digest(std::span<const double> datum, const UserSalt& mu);

} // namespace csmt
