// SPDX-License-Identifier: Apache-2.0
#include "simuhome/common/digest.hpp"

#include <openssl/sha.h>

namespace simuhome {

std::string sha256_hex(std::string_view data) {
  unsigned char out[SHA256_DIGEST_LENGTH];
  SHA256(reinterpret_cast<const unsigned char*>(data.data()), data.size(), out);
  static const char* hex = "0123456789abcdef";
  std::string s;
  s.reserve(2 * SHA256_DIGEST_LENGTH);
  for (unsigned char c : out) {
    s.push_back(hex[c >> 4]);
    s.push_back(hex[c & 15]);
  }
  return s;
}

}  // namespace simuhome
