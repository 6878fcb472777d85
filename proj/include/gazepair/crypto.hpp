#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "gazepair/gaze.hpp"
#include "gazepair/rng.hpp"

namespace gazepair {

constexpr int kDefaultKdfIterations = 50000;
constexpr std::size_t kKeyBytes = 32;
constexpr std::size_t kSaltBytes = 8;
constexpr std::size_t kNonceBytes = 12;
constexpr std::size_t kTagBytes = 16;

// Prefix of every confirmation challenge; the encryptor's client id follows.
inline constexpr char kChallengePrefix[] = "GAZEPAIR-CONFIRM-v1";

inline std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> data) {
  std::array<std::uint8_t, 32> out{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 ||
      len != out.size())
    throw std::runtime_error("sha256 failed");
  return out;
}

/// Host-published session randomness: a single 64-bit seed, expanded by
/// domain-separated hashing into the KDF salt and the cipher nonce base.
/// Only seed64 crosses the network; both sides expand it identically.
struct SessionRandomness {
  std::uint64_t seed64 = 0;
  std::array<std::uint8_t, kSaltBytes> salt{};
  std::array<std::uint8_t, kNonceBytes> iv{};
};

namespace detail {
inline std::array<std::uint8_t, 32> tagged_hash(const char* tag, std::uint64_t seed64) {
  std::vector<std::uint8_t> buf(std::strlen(tag) + 8);
  std::memcpy(buf.data(), tag, std::strlen(tag));
  for (int i = 0; i < 8; ++i)
    buf[std::strlen(tag) + static_cast<std::size_t>(i)] =
        static_cast<std::uint8_t>(seed64 >> (56 - 8 * i));
  return sha256(buf);
}
}  // namespace detail

inline SessionRandomness expand_session_randomness(std::uint64_t seed64) {
  SessionRandomness r;
  r.seed64 = seed64;
  const auto salt_h = detail::tagged_hash("salt", seed64);
  const auto iv_h = detail::tagged_hash("iv", seed64);
  std::copy_n(salt_h.begin(), kSaltBytes, r.salt.begin());
  std::copy_n(iv_h.begin(), kNonceBytes, r.iv.begin());
  return r;
}

/// Host-only: draw the session seed and expand it.
inline SessionRandomness generate_session_randomness(Rng& rng) {
  return expand_session_randomness(rng.next_u64());
}

struct SymmetricKey {
  std::array<std::uint8_t, kKeyBytes> bytes{};
  friend bool operator==(const SymmetricKey&, const SymmetricKey&) = default;
};

/// PBKDF2-HMAC-SHA-256 over the secret string. The iteration count is a
/// protocol parameter (50,000 by default); tests may lower it for bulk runs.
inline SymmetricKey derive_key(const SharedSecret& secret, std::span<const std::uint8_t> salt,
                               int iterations = kDefaultKdfIterations) {
  if (secret.value.empty()) throw std::invalid_argument("derive_key: empty secret");
  if (iterations < 1) throw std::invalid_argument("derive_key: iterations must be >= 1");
  SymmetricKey key;
  if (PKCS5_PBKDF2_HMAC(secret.value.data(), static_cast<int>(secret.value.size()), salt.data(),
                        static_cast<int>(salt.size()), iterations, EVP_sha256(),
                        static_cast<int>(key.bytes.size()), key.bytes.data()) != 1)
    throw std::runtime_error("PBKDF2 failed");
  return key;
}

/// AES-256-GCM proof of key possession. Authentic and decryptable iff the
/// verifier holds the byte-identical key and session randomness.
struct Confirmation {
  std::uint32_t client_id = 0;
  std::vector<std::uint8_t> ciphertext;
  std::array<std::uint8_t, kTagBytes> auth_tag{};
};

namespace detail {

// Per-client nonce: session iv with the client id XORed into the tail.
// Distinct ids give distinct nonces under one session key.
inline std::array<std::uint8_t, kNonceBytes> nonce_for(const SessionRandomness& r,
                                                       std::uint32_t client_id) {
  auto nonce = r.iv;
  for (int i = 0; i < 4; ++i)
    nonce[kNonceBytes - 4 + static_cast<std::size_t>(i)] ^=
        static_cast<std::uint8_t>(client_id >> (24 - 8 * i));
  return nonce;
}

inline std::vector<std::uint8_t> challenge_plaintext(std::uint32_t client_id) {
  std::vector<std::uint8_t> pt(kChallengePrefix, kChallengePrefix + std::strlen(kChallengePrefix));
  for (int i = 0; i < 4; ++i)
    pt.push_back(static_cast<std::uint8_t>(client_id >> (24 - 8 * i)));
  return pt;
}

struct CipherCtx {
  EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
  ~CipherCtx() { EVP_CIPHER_CTX_free(ctx); }
  CipherCtx() {
    if (!ctx) throw std::runtime_error("EVP_CIPHER_CTX_new failed");
  }
  CipherCtx(const CipherCtx&) = delete;
  CipherCtx& operator=(const CipherCtx&) = delete;
};

}  // namespace detail

inline Confirmation make_confirmation(const SymmetricKey& key, const SessionRandomness& randomness,
                                      std::uint32_t client_id) {
  const auto nonce = detail::nonce_for(randomness, client_id);
  const auto plaintext = detail::challenge_plaintext(client_id);

  detail::CipherCtx c;
  Confirmation conf;
  conf.client_id = client_id;
  conf.ciphertext.resize(plaintext.size());
  int len = 0;
  if (EVP_EncryptInit_ex(c.ctx, EVP_aes_256_gcm(), nullptr, key.bytes.data(), nonce.data()) != 1 ||
      EVP_EncryptUpdate(c.ctx, conf.ciphertext.data(), &len, plaintext.data(),
                        static_cast<int>(plaintext.size())) != 1)
    throw std::runtime_error("AES-GCM encrypt failed");
  int fin = 0;
  if (EVP_EncryptFinal_ex(c.ctx, conf.ciphertext.data() + len, &fin) != 1 ||
      EVP_CIPHER_CTX_ctrl(c.ctx, EVP_CTRL_GCM_GET_TAG, static_cast<int>(kTagBytes),
                          conf.auth_tag.data()) != 1)
    throw std::runtime_error("AES-GCM finalize failed");
  return conf;
}

enum class VerifyResult { pass, auth_failure, plaintext_mismatch };

inline const char* to_string(VerifyResult v) {
  switch (v) {
    case VerifyResult::pass: return "pass";
    case VerifyResult::auth_failure: return "auth_failure";
    case VerifyResult::plaintext_mismatch: return "plaintext_mismatch";
  }
  return "?";
}

inline VerifyResult verify_confirmation(const SymmetricKey& key,
                                        const SessionRandomness& randomness,
                                        const Confirmation& conf) {
  const auto nonce = detail::nonce_for(randomness, conf.client_id);

  detail::CipherCtx c;
  std::vector<std::uint8_t> plaintext(conf.ciphertext.size());
  int len = 0;
  auto tag = conf.auth_tag;
  if (EVP_DecryptInit_ex(c.ctx, EVP_aes_256_gcm(), nullptr, key.bytes.data(), nonce.data()) != 1 ||
      EVP_DecryptUpdate(c.ctx, plaintext.data(), &len, conf.ciphertext.data(),
                        static_cast<int>(conf.ciphertext.size())) != 1)
    throw std::runtime_error("AES-GCM decrypt failed");
  if (EVP_CIPHER_CTX_ctrl(c.ctx, EVP_CTRL_GCM_SET_TAG, static_cast<int>(kTagBytes), tag.data()) != 1)
    throw std::runtime_error("AES-GCM set tag failed");
  int fin = 0;
  if (EVP_DecryptFinal_ex(c.ctx, plaintext.data() + len, &fin) != 1)
    return VerifyResult::auth_failure;

  return plaintext == detail::challenge_plaintext(conf.client_id)
             ? VerifyResult::pass
             : VerifyResult::plaintext_mismatch;
}

/// Short public identifier for a key (hash prefix); safe to print and log.
inline std::string key_fingerprint(const SymmetricKey& key) {
  const auto h = sha256(key.bytes);
  static constexpr char hex[] = "0123456789abcdef";
  std::string s;
  for (int i = 0; i < 8; ++i) {
    s += hex[h[static_cast<std::size_t>(i)] >> 4];
    s += hex[h[static_cast<std::size_t>(i)] & 0xf];
  }
  return s;
}

}  // namespace gazepair
