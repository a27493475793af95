#include "lyap/tape.hpp"

#include <cstring>
#include <map>
#include <tuple>
#include <unordered_map>

namespace lyap {

namespace {

class TapeBuilder {
 public:
  explicit TapeBuilder(std::size_t num_vars) : n_(num_vars) {
    for (std::size_t i = 0; i < n_; ++i) {
      code.push_back({TapeOp::Var, static_cast<std::uint32_t>(i), 0, 0.0});
      constant.push_back(0);
      deps.push_back(i < 64 ? (std::uint64_t{1} << i) : ~std::uint64_t{0});
    }
  }

  std::uint32_t slot_of(const Expr& e) {
    auto it = memo_.find(e.id());
    if (it != memo_.end()) return it->second;
    std::uint32_t s = build(e);
    memo_.emplace(e.id(), s);
    return s;
  }

  std::vector<Instr> code;
  std::vector<std::uint8_t> constant;
  std::vector<std::uint64_t> deps;

 private:
  using Key = std::tuple<int, std::uint32_t, std::uint32_t, std::uint64_t>;

  std::uint32_t emit(TapeOp op, std::uint32_t a, std::uint32_t b, double c) {
    std::uint64_t bits;
    std::memcpy(&bits, &c, sizeof bits);
    Key key{static_cast<int>(op), a, b, bits};
    auto it = cse_.find(key);
    if (it != cse_.end()) return it->second;
    auto s = static_cast<std::uint32_t>(code.size());
    code.push_back({op, a, b, c});
    bool unary = op == TapeOp::Neg || op == TapeOp::Sqr || op == TapeOp::AddC ||
                 op == TapeOp::RSubC || op == TapeOp::MulC || op == TapeOp::DivC ||
                 op == TapeOp::RDivC;
    if (op == TapeOp::Const) {
      constant.push_back(1);
      deps.push_back(0);
    } else if (unary) {
      constant.push_back(constant[a]);
      deps.push_back(deps[a]);
    } else {
      constant.push_back(constant[a] && constant[b]);
      deps.push_back(deps[a] | deps[b]);
    }
    cse_.emplace(key, s);
    return s;
  }

  std::uint32_t build(const Expr& e) {
    switch (e.op()) {
      case Op::Const: return emit(TapeOp::Const, 0, 0, e.value());
      case Op::Var:
        if (e.index() >= n_) throw UsageError("expression references an undeclared variable");
        return static_cast<std::uint32_t>(e.index());
      case Op::Neg: return emit(TapeOp::Neg, slot_of(e.lhs()), 0, 0.0);
      case Op::Sqr: return emit(TapeOp::Sqr, slot_of(e.lhs()), 0, 0.0);
      default: break;
    }
    const Expr& l = e.lhs();
    const Expr& r = e.rhs();
    const bool lc = l.is_const(), rc = r.is_const();
    if (lc != rc) {
      switch (e.op()) {
        case Op::Add:
          return lc ? emit(TapeOp::AddC, slot_of(r), 0, l.value())
                    : emit(TapeOp::AddC, slot_of(l), 0, r.value());
        case Op::Sub:
          return lc ? emit(TapeOp::RSubC, slot_of(r), 0, l.value())
                    : emit(TapeOp::AddC, slot_of(l), 0, -r.value());
        case Op::Mul:
          return lc ? emit(TapeOp::MulC, slot_of(r), 0, l.value())
                    : emit(TapeOp::MulC, slot_of(l), 0, r.value());
        case Op::Div:
          return lc ? emit(TapeOp::RDivC, slot_of(r), 0, l.value())
                    : emit(TapeOp::DivC, slot_of(l), 0, r.value());
        default: break;
      }
    }
    std::uint32_t a = slot_of(l), b = slot_of(r);
    switch (e.op()) {
      case Op::Add: return emit(TapeOp::Add, std::min(a, b), std::max(a, b), 0.0);
      case Op::Mul:
        if (a == b) return emit(TapeOp::Sqr, a, 0, 0.0);
        return emit(TapeOp::Mul, std::min(a, b), std::max(a, b), 0.0);
      case Op::Sub: return emit(TapeOp::Sub, a, b, 0.0);
      case Op::Div: return emit(TapeOp::Div, a, b, 0.0);
      default: break;
    }
    throw UsageError("unknown expression op");
  }

  std::size_t n_;
  std::unordered_map<const void*, std::uint32_t> memo_;
  std::map<Key, std::uint32_t> cse_;
};

}  // namespace

Tape::Tape(const std::vector<Expr>& outputs, std::size_t num_vars) : num_vars_(num_vars) {
  TapeBuilder b(num_vars);
  for (const auto& e : outputs) outputs_.push_back(b.slot_of(e));
  code_ = std::move(b.code);
  constant_ = std::move(b.constant);
  deps_ = std::move(b.deps);
}

}  // namespace lyap
