#include <cstring>
#include <fstream>

#include "binio.hpp"
#include "temprel/preprocess.hpp"

namespace temprel {

namespace {

using namespace binio;

constexpr char kMagic[8] = {'T', 'P', 'R', 'E', 'L', 'W', 'I', 'N'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

void write_windows(const std::string& path, const std::vector<WindowInstance>& windows,
                   const DatasetProfile& profile) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write window file: " + path);
  out.write(kMagic, sizeof(kMagic));
  put_u32(out, kVersion);
  put_str(out, profile.name());
  put_u32(out, static_cast<std::uint32_t>(profile.label_count()));
  for (const auto& l : profile.labels()) put_str(out, l.name);

  put_u32(out, static_cast<std::uint32_t>(windows.size()));
  for (const auto& w : windows) {
    put_str(out, w.doc_id);
    put_i32(out, w.window_index);
    const int n = w.n();
    put_i32(out, n);
    for (const auto& t : w.tokens) put_str(out, t);
    for (const auto& [s, t] : w.token_origin) {
      put_i32(out, s);
      put_i32(out, t);
    }
    std::vector<unsigned char> cells(static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) cells[j * n + i] = w.arc_gold(i, j) ? 1 : 0;
    out.write(reinterpret_cast<const char*>(cells.data()), cells.size());
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) cells[j * n + i] = static_cast<unsigned char>(w.rel_gold(i, j));
    out.write(reinterpret_cast<const char*>(cells.data()), cells.size());
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) cells[j * n + i] = w.loss_mask(i, j) ? 1 : 0;
    out.write(reinterpret_cast<const char*>(cells.data()), cells.size());
    put_u32(out, static_cast<std::uint32_t>(w.event_first_tokens.size()));
    for (const auto& [id, idx] : w.event_first_tokens) {
      put_str(out, id);
      put_i32(out, idx);
    }
  }
  if (!out) throw DataError("write failed: " + path);
}

std::vector<WindowInstance> read_windows(const std::string& path, const DatasetProfile& profile) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open window file: " + path);
  char magic[8];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw DataError(path + ": not a temprel window file (bad magic)");
  if (get_u32(in, path) != kVersion) throw DataError(path + ": unsupported window file version");

  const std::string stored_profile = get_str(in, path);
  if (stored_profile != profile.name())
    throw DataError(path + ": window file was built with profile '" + stored_profile +
                    "', expected '" + profile.name() + "'");
  const std::uint32_t label_count = get_u32(in, path);
  if (label_count != static_cast<std::uint32_t>(profile.label_count()))
    throw DataError(path + ": label count mismatch against profile " + profile.name());
  for (int k = 0; k < static_cast<int>(label_count); ++k) {
    const std::string name = get_str(in, path);
    if (name != profile.name_of(k))
      throw DataError(path + ": label order mismatch at id " + std::to_string(k));
  }

  const std::uint32_t count = get_u32(in, path);
  std::vector<WindowInstance> windows;
  windows.reserve(count);
  for (std::uint32_t wi = 0; wi < count; ++wi) {
    WindowInstance w;
    w.doc_id = get_str(in, path);
    w.window_index = get_i32(in, path);
    const int n = get_i32(in, path);
    if (n <= 0) throw DataError(path + ": invalid window length");
    w.tokens.reserve(n);
    for (int t = 0; t < n; ++t) w.tokens.push_back(get_str(in, path));
    for (int t = 0; t < n; ++t) {
      const int s = get_i32(in, path);
      const int k = get_i32(in, path);
      w.token_origin.emplace_back(s, k);
    }
    std::vector<unsigned char> cells(static_cast<std::size_t>(n) * n);
    auto read_cells = [&]() {
      if (!in.read(reinterpret_cast<char*>(cells.data()), cells.size()))
        throw DataError(path + ": truncated window file");
    };
    read_cells();
    w.arc_gold = BoolMat::Constant(n, n, false);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) w.arc_gold(i, j) = cells[j * n + i] != 0;
    read_cells();
    w.rel_gold = LabelMat::Constant(n, n, kNoneLabel);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const int label = cells[j * n + i];
        if (label >= profile.label_count())
          throw DataError(path + ": label id out of profile range");
        w.rel_gold(i, j) = label;
      }
    read_cells();
    w.loss_mask = BoolMat::Constant(n, n, false);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) w.loss_mask(i, j) = cells[j * n + i] != 0;
    const std::uint32_t n_events = get_u32(in, path);
    for (std::uint32_t e = 0; e < n_events; ++e) {
      std::string id = get_str(in, path);
      const int idx = get_i32(in, path);
      w.event_first_tokens.emplace_back(std::move(id), idx);
    }
    windows.push_back(std::move(w));
  }
  return windows;
}

}  // namespace temprel
