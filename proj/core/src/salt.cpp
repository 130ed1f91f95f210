#include "csmt/salt.hpp"

#include "csmt/serialize.hpp"

#include <algorithm>

namespace csmt {

static SaltBytes random_salt_bytes() {
    Bytes raw = random_bytes(kSaltLen);
    SaltBytes out;
    std::copy(raw.begin(), raw.end(), out.begin());
    return out;
}

UserSalt random_user_salt() { return UserSalt{random_salt_bytes()}; }
TransformSalt random_transform_salt() { return TransformSalt{random_salt_bytes()}; }

Digest256 tau_digest(const TransformSalt& tau) {
    return hash_node(std::span<const std::uint8_t>(tau.bytes.data(), tau.bytes.size()));
}

Digest256 record_digest(std::span<const double> datum, const UserSalt& mu) {
    CanonicalWriter w;
    w.add_doubles(datum);
    w.add_bytes(std::span<const std::uint8_t>(mu.bytes.data(), mu.bytes.size()));
    return hash_node(w.bytes());
}

} // namespace csmt
