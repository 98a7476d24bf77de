#include "qa4ie/ad/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace qa4ie::ad {

namespace {

constexpr std::size_t kMagicLen = sizeof(kCheckpointMagic) - 1;

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
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
    if (bytes_.size() - pos_ < n) throw std::runtime_error("checkpoint: truncated at byte " + std::to_string(pos_));
  }
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_checkpoint(const std::vector<NamedTensor>& records) {
  std::string out(kCheckpointMagic, kMagicLen);
  put_u64(out, records.size());
  for (const auto& r : records) {
    put_u64(out, r.name.size());
    out += r.name;
    put_u64(out, r.value.rank());
    for (auto d : r.value.shape()) put_u64(out, d);
    for (double v : r.value.data()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

std::vector<NamedTensor> decode_checkpoint(const std::string& bytes) {
  if (bytes.compare(0, kMagicLen, kCheckpointMagic) != 0) throw std::runtime_error("checkpoint: bad magic");
  Reader in(bytes);
  in.take(kMagicLen);
  const std::uint64_t count = in.u64();
  std::vector<NamedTensor> records;
  for (std::uint64_t i = 0; i < count; ++i) {
    NamedTensor r;
    r.name = in.take(in.u64());
    const std::uint64_t rank = in.u64();
    if (rank == 0 || rank > 8) throw std::runtime_error("checkpoint: record '" + r.name + "' has rank " + std::to_string(rank));
    Shape shape(rank);
    for (auto& d : shape) d = in.u64();
    const std::size_t n = element_count(shape);
    if (n > bytes.size() / 8) throw std::runtime_error("checkpoint: record '" + r.name + "' larger than file");
    std::vector<double> data(n);
    for (auto& v : data) v = std::bit_cast<double>(in.u64());
    r.value = Tensor(std::move(shape), std::move(data));
    records.push_back(std::move(r));
  }
  if (!in.done()) throw std::runtime_error("checkpoint: trailing bytes");
  return records;
}

void save_checkpoint(const std::filesystem::path& path, const ParameterSet& params) {
  std::vector<NamedTensor> records;
  for (const Parameter* p : params.all()) records.push_back({p->name, p->value});
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  const std::string bytes = encode_checkpoint(records);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing checkpoint " + path.string());
}

std::vector<NamedTensor> read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_checkpoint(ss.str());
}

void assign_records(const std::vector<NamedTensor>& records, ParameterSet& params) {
  if (records.size() != params.size()) {
    throw std::runtime_error("checkpoint holds " + std::to_string(records.size()) + " tensors, model expects " +
                             std::to_string(params.size()));
  }
  for (const auto& r : records) {
    if (!params.contains(r.name)) throw std::runtime_error("checkpoint tensor '" + r.name + "' unknown to model");
    Parameter& p = params.get(r.name);
    if (p.value.shape() != r.value.shape()) {
      throw std::runtime_error("checkpoint tensor '" + r.name + "' has shape " + to_string(r.value.shape()) +
                               ", model expects " + to_string(p.value.shape()));
    }
  }
  for (const auto& r : records) params.get(r.name).value = r.value;
}

void load_checkpoint(const std::filesystem::path& path, ParameterSet& params) {
  assign_records(read_checkpoint(path), params);
}

}  // namespace qa4ie::ad
