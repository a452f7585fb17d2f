#include "emfend/model/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "emfend/error.hpp"

namespace emfend::model {

namespace {

constexpr char kMagic[8] = {'E', 'M', 'F', 'E', 'N', 'D', 'C', 'K'};

template <typename T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xff));
  }
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename T>
  T le() {
    need(sizeof(T));
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }

  std::string take(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw DataError("checkpoint: truncated file");
  }

  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_checkpoint(const EmFend& model) {
  std::string out(kMagic, sizeof kMagic);
  put_le<std::uint32_t>(out, kCheckpointVersion);
  const std::string config = to_json(model.config(), -1);
  put_le<std::uint64_t>(out, config.size());
  out += config;
  const auto& entries = model.parameters().entries();
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(entries.size()));
  for (const auto& [name, entry] : entries) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    put_le<std::uint8_t>(out, entry.trainable ? 1 : 0);
    const numerics::Tensor& value = entry.var.value();
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(value.shape().size()));
    for (std::size_t extent : value.shape()) put_le<std::uint64_t>(out, extent);
    for (double v : value.data()) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  return out;
}

std::unique_ptr<EmFend> deserialize_checkpoint(const std::string& bytes) {
  Reader in(bytes);
  if (in.take(sizeof kMagic) != std::string(kMagic, sizeof kMagic)) {
    throw DataError("checkpoint: bad magic");
  }
  const auto version = in.le<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw DataError("checkpoint: unsupported version " + std::to_string(version));
  }
  const auto config_size = in.le<std::uint64_t>();
  auto model = std::make_unique<EmFend>(config_from_json(in.take(config_size)));
  numerics::ParameterStore& store = model->parameters();

  const auto count = in.le<std::uint32_t>();
  if (count != store.size()) {
    throw DataError("checkpoint: " + std::to_string(count) + " parameters, config implies " +
                    std::to_string(store.size()));
  }
  for (std::uint32_t k = 0; k < count; ++k) {
    const std::string name = in.take(in.le<std::uint32_t>());
    if (!store.contains(name)) throw DataError("checkpoint: unexpected parameter '" + name + "'");
    const bool trainable = in.le<std::uint8_t>() != 0;
    numerics::Shape shape(in.le<std::uint32_t>());
    for (auto& extent : shape) extent = in.le<std::uint64_t>();
    numerics::Tensor& value = store.value(name);
    if (shape != value.shape()) {
      throw DataError("checkpoint: parameter '" + name + "' has shape " + numerics::shape_string(shape) +
                      ", expected " + numerics::shape_string(value.shape()));
    }
    for (double& v : value.data()) v = std::bit_cast<float>(in.le<std::uint32_t>());
    store.set_trainable(name, trainable);
  }
  if (!in.done()) throw DataError("checkpoint: trailing bytes");
  return model;
}

void save_checkpoint(const std::string& path, const EmFend& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint '" + path + "'");
  const std::string bytes = serialize_checkpoint(model);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing checkpoint '" + path + "'");
}

std::unique_ptr<EmFend> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint '" + path + "'");
  std::ostringstream bytes;
  bytes << in.rdbuf();
  return deserialize_checkpoint(bytes.str());
}

}  // namespace emfend::model
