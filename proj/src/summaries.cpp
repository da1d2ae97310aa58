#include "modlock/summaries.hpp"

#include "modlock/error.hpp"

namespace modlock::summaries {

void SummaryStore::put(Summary s) {
  std::string id = s.id;
  by_id_.insert_or_assign(std::move(id), std::move(s));
}

const Summary& SummaryStore::get(const std::string& id) const {
  if (const Summary* s = find(id)) return *s;
  throw Error(ErrorKind::UnknownModule, "no summary for '" + id + "'");
}

const Summary* SummaryStore::find(const std::string& id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &it->second;
}

NameSet SummaryStore::reverse_closure(const NameSet& ids) const {
  NameSet out = ids;
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& [id, s] : by_id_) {
      if (out.contains(id)) continue;
      auto hit = [&](const NameSet& names) {
        for (const auto& n : names)
          if (out.contains(n)) return true;
        return false;
      };
      if (hit(s.used) || hit(s.gen_by)) {
        out.insert(id);
        grew = true;
      }
    }
  }
  return out;
}

NameSet allowed(const SummaryStore& store, const std::string& mod) {
  const Summary& s = store.get(mod);
  NameSet out = s.gen_by;
  for (const auto& g : s.gen_by) {
    const auto& used = store.get(g).used;
    out.insert(used.begin(), used.end());
  }
  return out;
}

namespace {

bool dep_ok_on_path(const std::string& m, const NameSet& allow, const SummaryStore& store, NameSet& path) {
  if (allow.contains(m)) return true;
  if (!path.insert(m).second) return false;
  const Summary& s = store.get(m);
  bool ok = !s.gen_by.empty();
  for (const auto& g : s.gen_by) {
    if (!ok) break;
    ok = dep_ok_on_path(g, allow, store, path);
  }
  path.erase(m);
  return ok;
}

}  // namespace

bool dep_ok(const std::string& m, const std::string& mod, const SummaryStore& store) {
  NameSet allow = allowed(store, mod);
  NameSet path;
  return dep_ok_on_path(m, allow, store, path);
}

NameSet hidden(const std::string& mod, const SummaryStore& store) {
  NameSet allow = allowed(store, mod);
  NameSet out;
  for (const auto& m : store.get(mod).used) {
    NameSet path;
    if (!dep_ok_on_path(m, allow, store, path)) out.insert(m);
  }
  return out;
}

SExpr summary_to_sexpr(const Summary& s) {
  auto names = [](const char* head, const NameSet& set) {
    SExpr::List items{SExpr::sym(head)};
    for (const auto& n : set) items.push_back(SExpr::str(n));
    return SExpr::list(std::move(items));
  };
  return SExpr::list({SExpr::sym("summary"), SExpr::str(s.id), names("used", s.used), names("genby", s.gen_by)});
}

Summary summary_from_sexpr(const SExpr& e) {
  auto bad = [&]() -> Error { return Error(ErrorKind::Syntax, "malformed summary record: " + print_sexpr(e)); };
  if (!e.is_form("summary") || e.items().size() != 4 || !e.items()[1].is_str()) throw bad();
  auto names = [&](const SExpr& part, const char* head) {
    if (!part.is_form(head)) throw bad();
    NameSet out;
    for (std::size_t k = 1; k < part.items().size(); ++k) {
      if (!part.items()[k].is_str()) throw bad();
      out.insert(part.items()[k].text());
    }
    return out;
  };
  return Summary{e.items()[1].text(), names(e.items()[2], "used"), names(e.items()[3], "genby")};
}

}  // namespace modlock::summaries
