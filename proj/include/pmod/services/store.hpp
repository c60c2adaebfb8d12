#pragma once

#include <filesystem>
#include <string>

#include "pmod/common/bytes.hpp"

namespace pmod::services {

// Opaque serialized bundle. This is the only payload type the store accepts,
// so keys of any kind cannot be handed to it by accident.
class SealedBundle {
 public:
  // Throws FormatError unless the bytes start with the bundle magic.
  static SealedBundle from_bytes(Bytes bytes);
  const Bytes& bytes() const { return bytes_; }

 private:
  explicit SealedBundle(Bytes b) : bytes_(std::move(b)) {}
  Bytes bytes_;
};

struct StoreRef {
  std::string id;  // hex SHA-256 of the bundle bytes
  std::string location;
};

// Content-addressed objects under root/objects/<id>.
class FsBundleStore {
 public:
  explicit FsBundleStore(std::filesystem::path root);

  // Idempotent.
  StoreRef put(const SealedBundle& bundle);
  // Throws NotFound for an unknown id, IntegrityError when the stored object
  // no longer hashes to its id and InvalidArgument for a malformed id.
  SealedBundle get(const std::string& id) const;

 private:
  std::filesystem::path object_path(const std::string& id) const;
  std::filesystem::path root_;
};

bool is_object_id(std::string_view id);

}  // namespace pmod::services
