#include "logdyn/ltrj.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <limits>
#include <ostream>

#include "logdyn/error.hpp"

namespace logdyn {
namespace {

using nlohmann::json;

constexpr std::size_t kMaxHeader = 1u << 24;

void put_u32(std::vector<std::byte>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xFFu));
}

void put_f32(std::vector<std::byte>& out, float v) {
  put_u32(out, std::bit_cast<std::uint32_t>(v));
}

class Cursor {
 public:
  explicit Cursor(std::span<const std::byte> bytes) : bytes_(bytes) {}

  std::size_t remaining() const { return bytes_.size() - pos_; }

  void need(std::size_t n, const char* what) const {
    if (remaining() < n)
      fail(ErrorKind::Format, std::string("LTRJ truncated while reading ") + what +
                                  ": need " + std::to_string(n) + " bytes, have " +
                                  std::to_string(remaining()));
  }

  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }

  float f32() { return std::bit_cast<float>(u32()); }

  std::string_view text(std::size_t n) {
    std::string_view s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

 private:
  std::span<const std::byte> bytes_;
  std::size_t pos_ = 0;
};

std::uint64_t header_uint(const json& header, const char* key) {
  auto it = header.find(key);
  if (it == header.end() || !it->is_number_unsigned())
    fail(ErrorKind::Format, std::string("LTRJ header field '") + key +
                                "' missing or not a nonnegative integer");
  return it->get<std::uint64_t>();
}

json make_header(const Trajectory& traj) {
  json h = json::object();
  h["model_id"] = traj.model_id;
  h["d"] = traj.dim;
  h["vocab"] = traj.vocab;
  h["T"] = traj.steps();
  h["context_len"] = traj.context_len;
  h["has_head"] = traj.head ? 1 : 0;
  h["dtype"] = "f32";
  if (!traj.notes.empty()) h["notes"] = traj.notes;
  return h;
}

}  // namespace

std::vector<std::byte> encode_trajectory(const Trajectory& traj) {
  validate(traj);
  const std::string header = make_header(traj).dump();
  require(header.size() <= kMaxHeader, ErrorKind::InvalidArgument, "LTRJ header too large");

  std::vector<std::byte> out;
  const std::size_t T = traj.steps();
  std::size_t payload = 4 * (traj.hidden.size() + 2 * T);
  if (traj.head) payload += 4 * (traj.head->weights().size() + traj.head->bias().size());
  out.reserve(kLtrjMagic.size() + 4 + header.size() + payload);

  for (char c : kLtrjMagic) out.push_back(static_cast<std::byte>(c));
  put_u32(out, static_cast<std::uint32_t>(header.size()));
  for (char c : header) out.push_back(static_cast<std::byte>(c));
  for (float x : traj.hidden) put_f32(out, x);
  for (std::uint32_t id : traj.token_ids) put_u32(out, id);
  for (float p : traj.p_realized) put_f32(out, p);
  if (traj.head) {
    for (float w : traj.head->weights()) put_f32(out, w);
    for (float b : traj.head->bias()) put_f32(out, b);
  }
  return out;
}

Trajectory decode_trajectory(std::span<const std::byte> bytes) {
  Cursor cur(bytes);
  cur.need(kLtrjMagic.size(), "magic");
  if (cur.text(kLtrjMagic.size()) != kLtrjMagic)
    fail(ErrorKind::Format, "LTRJ bad magic (expected \"LTRJv001\")");
  cur.need(4, "header length");
  const std::uint32_t header_len = cur.u32();
  require(header_len <= kMaxHeader, ErrorKind::Format, "LTRJ header length implausible");
  cur.need(header_len, "header");
  json header;
  try {
    header = json::parse(cur.text(header_len));
  } catch (const json::exception& e) {
    fail(ErrorKind::Format, std::string("LTRJ header is not valid JSON: ") + e.what());
  }
  require(header.is_object(), ErrorKind::Format, "LTRJ header must be a JSON object");
  require(header.value("dtype", std::string{}) == "f32", ErrorKind::Format,
          "LTRJ header dtype must be \"f32\"");

  Trajectory traj;
  traj.model_id = header.value("model_id", std::string{});
  const std::uint64_t d = header_uint(header, "d");
  const std::uint64_t V = header_uint(header, "vocab");
  const std::uint64_t T = header_uint(header, "T");
  const std::uint64_t ctx = header_uint(header, "context_len");
  const std::uint64_t has_head = header_uint(header, "has_head");
  require(has_head <= 1, ErrorKind::Format, "LTRJ has_head must be 0 or 1");
  require(ctx <= std::numeric_limits<std::uint32_t>::max(), ErrorKind::Format,
          "LTRJ context_len out of range");
  if (auto it = header.find("notes"); it != header.end()) traj.notes = *it;

  // Overflow-safe size check before allocating anything.
  constexpr std::uint64_t kLimit = std::uint64_t{1} << 40;
  require(d < kLimit && V < kLimit && T < kLimit && d * T < kLimit && d * V < kLimit,
          ErrorKind::Format, "LTRJ dimensions implausible");
  std::uint64_t payload = 4 * (T * d + 2 * T);
  if (has_head) payload += 4 * (V * d + V);
  if (cur.remaining() < payload)
    fail(ErrorKind::Format, "LTRJ truncated payload: header claims T=" + std::to_string(T) +
                                " (" + std::to_string(payload) + " bytes), file holds " +
                                std::to_string(cur.remaining()));
  if (cur.remaining() > payload)
    fail(ErrorKind::Format, "LTRJ length mismatch: " +
                                std::to_string(cur.remaining() - payload) +
                                " trailing bytes after payload");

  traj.dim = d;
  traj.vocab = V;
  traj.context_len = static_cast<std::uint32_t>(ctx);
  traj.hidden.resize(T * d);
  for (float& x : traj.hidden) x = cur.f32();
  traj.token_ids.resize(T);
  for (auto& id : traj.token_ids) id = cur.u32();
  traj.p_realized.resize(T);
  for (float& p : traj.p_realized) p = cur.f32();
  if (has_head) {
    std::vector<float> w(V * d), b(V);
    for (float& x : w) x = cur.f32();
    for (float& x : b) x = cur.f32();
    traj.head.emplace(V, d, std::move(w), std::move(b));
  }
  validate(traj);
  return traj;
}

void write_trajectory(const Trajectory& traj, std::ostream& out) {
  const auto bytes = encode_trajectory(traj);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::Io, "LTRJ write failed");
}

Trajectory read_trajectory(std::istream& in) {
  std::vector<char> raw{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (in.bad()) fail(ErrorKind::Io, "LTRJ read failed");
  return decode_trajectory(std::as_bytes(std::span<const char>(raw)));
}

void save_trajectory(const Trajectory& traj, const std::filesystem::path& path) {
  const auto bytes = encode_trajectory(traj);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::Io, "write to '" + path.string() + "' failed");
}

Trajectory load_trajectory(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path.string() + "'");
  try {
    return read_trajectory(in);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

}  // namespace logdyn
