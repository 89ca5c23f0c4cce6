#include "lidarforge/fingerprint.hpp"

#include <openssl/crypto.h>
#include <openssl/sha.h>

#include <array>

namespace lidarforge {

std::string sha256_hex(std::string_view data) {
    std::array<unsigned char, SHA256_DIGEST_LENGTH> digest{};
    SHA256(reinterpret_cast<const unsigned char *>(data.data()), data.size(), digest.data());
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * digest.size());
    for (const auto b : digest) {
        out.push_back(kHex[b >> 4U]);
        out.push_back(kHex[b & 0xFU]);
    }
    return out;
}

std::string hash_library_version() { return OpenSSL_version(OPENSSL_VERSION); }

}  // namespace lidarforge
