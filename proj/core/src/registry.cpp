#include "ska/registry.hpp"

#include <algorithm>

#include "routines.hpp"

namespace ska {

const char* to_string(Participants p) {
  switch (p) {
    case Participants::Pair01: return "pair01";
    case Participants::Ring: return "ring";
    case Participants::All: return "all";
    case Participants::Half: return "half";
  }
  return "?";
}

void Registry::add(RoutineDef def) {
  if (find(def.name))
    throw FatalError("duplicate routine registration: " + def.name);
  index_.emplace_back(def.name, defs_.size());
  defs_.push_back(std::move(def));
}

void Registry::alias(const std::string& alt, const std::string& canonical) {
  for (const auto& [name, slot] : index_) {
    if (name == canonical) {
      index_.emplace_back(alt, slot);
      return;
    }
  }
  throw FatalError("alias target not registered: " + canonical);
}

const RoutineDef* Registry::find(const std::string& name) const {
  for (const auto& [n, slot] : index_)
    if (n == name) return &defs_[slot];
  return nullptr;
}

namespace {

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace

std::vector<std::string> Registry::near_misses(const std::string& name) const {
  std::vector<std::pair<std::size_t, std::string>> scored;
  for (const auto& [n, slot] : index_) {
    std::size_t d = edit_distance(name, n);
    if (d <= 3) scored.emplace_back(d, n);
  }
  std::sort(scored.begin(), scored.end());
  std::vector<std::string> out;
  for (const auto& [d, n] : scored) {
    if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(n);
    if (out.size() == 3) break;
  }
  return out;
}

const Registry& routine_registry() {
  static const Registry reg = [] {
    Registry r;
    register_pt2pt(r);
    register_coll(r);
    register_misc(r);
    r.alias("Bcast_All_Rounds", "Shmem_Bcast_All_Rounds");
    return r;
  }();
  return reg;
}

}  // namespace ska
