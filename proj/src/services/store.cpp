#include "pmod/services/store.hpp"

#include <fstream>
#include <functional>
#include <thread>

#include "pmod/common/crypto.hpp"
#include "pmod/common/error.hpp"

namespace pmod::services {

namespace fs = std::filesystem;

SealedBundle SealedBundle::from_bytes(Bytes bytes) {
  constexpr std::string_view magic = "PMODBNDL";
  if (bytes.size() < magic.size() || to_string(ByteView(bytes).first(magic.size())) != magic)
    throw FormatError("not a sealed bundle");
  return SealedBundle(std::move(bytes));
}

bool is_object_id(std::string_view id) {
  return id.size() == 64 &&
         id.find_first_not_of("0123456789abcdef") == std::string_view::npos;
}

FsBundleStore::FsBundleStore(fs::path root) : root_(std::move(root)) {
  fs::create_directories(root_ / "objects");
}

fs::path FsBundleStore::object_path(const std::string& id) const {
  if (!is_object_id(id)) throw InvalidArgument("malformed bundle id");
  return root_ / "objects" / id;
}

StoreRef FsBundleStore::put(const SealedBundle& bundle) {
  const auto id = to_hex(sha256(bundle.bytes()));
  const auto path = object_path(id);
  if (!fs::exists(path)) {
    // Write then rename so a concurrent get never sees half an object.
    const auto tmp = fs::path(path.string() + ".tmp." + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())));
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out.write(reinterpret_cast<const char*>(bundle.bytes().data()),
                static_cast<std::streamsize>(bundle.bytes().size()));
      if (!out) throw IoError("cannot write " + tmp.string());
    }
    fs::rename(tmp, path);
  }
  return {id, path.string()};
}

SealedBundle FsBundleStore::get(const std::string& id) const {
  const auto path = object_path(id);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFound("no bundle " + id);
  Bytes bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>{});
  if (to_hex(sha256(bytes)) != id) throw IntegrityError("stored object " + id + " does not match its id");
  return SealedBundle::from_bytes(std::move(bytes));
}

}  // namespace pmod::services
