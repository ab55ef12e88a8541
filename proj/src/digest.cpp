#include "reachplan/digest.hpp"

#include "reachplan/error.hpp"

#include <openssl/evp.h>

namespace reachplan {

Digest sha256(std::span<const std::uint8_t> bytes) {
    Digest out{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 ||
        len != out.size()) {
        throw Error("SHA-256 digest failed");
    }
    return out;
}

} // namespace reachplan
