#pragma once

// Shared between the evaluator translation units; not installed.

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "modlock/lang.hpp"

namespace modlock::lang {

struct Template {
  enum class Kind { Literal, Unquote, List };
  struct Item {
    bool splice = false;
    std::shared_ptr<const Template> tmpl;
  };
  Kind kind = Kind::Literal;
  Value literal;
  ExpPtr expr;
  std::vector<Item> items;
};

/// Definitions of one base module, evaluated on first lookup so that
/// definitions may refer to each other in any order.
struct RecFrame {
  enum class State { Pending, Evaluating, Done };
  struct Slot {
    std::string name;
    ExpPtr exp;
    Value value;
    State state = State::Pending;
  };
  std::vector<Slot> slots;
  Env env;  // includes this frame
};

struct Env::Frame {
  std::vector<Binding> vars;
  std::unordered_map<std::string, std::size_t> index;  // only for large frames
  std::shared_ptr<RecFrame> rec;
  std::shared_ptr<const Frame> parent;
};

/// Builds the recursive frame for `defs` on top of `parent` and forces every
/// definition in order.
class RecursiveScope {
 public:
  static std::vector<Env::Binding> evaluate(std::vector<std::pair<std::string, ExpPtr>> defs, const Env& parent);
};

std::vector<Env::Binding> make_builtins();

}  // namespace modlock::lang
