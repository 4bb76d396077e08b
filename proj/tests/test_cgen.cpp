#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "common.hpp"
#include "redsimpl/cgen.hpp"
#include "redsimpl/simplify.hpp"

using namespace redsimpl;

namespace {

bool have_cc() { return std::system("cc --version > /dev/null 2>&1") == 0; }

std::string run_c(const CUnit& u, const std::string& stdin_text, const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() / "redsimpl_cgen";
  std::filesystem::create_directories(dir);
  auto src = dir / (tag + ".c"), exe = dir / tag, in = dir / (tag + ".in"), out = dir / (tag + ".out");
  std::ofstream(src) << u.source;
  std::ofstream(in) << stdin_text;
  std::string cc = "cc -std=c99 -O1 -Wall -Werror -o " + exe.string() + " " + src.string() + " -lm";
  if (std::system(cc.c_str()) != 0) return "<compile failed>";
  std::string run = "ulimit -s unlimited 2>/dev/null; " + exe.string() + " < " + in.string() + " > " + out.string();
  if (std::system(run.c_str()) != 0) return "<run failed>";
  std::stringstream ss;
  ss << std::ifstream(out).rdbuf();
  return ss.str();
}

template <class S>
std::string value_text(const S& x) {
  return to_string(x);
}

// Interpreter outputs and the stdin text feeding the same inputs to C.
template <class S>
std::pair<std::string, std::vector<std::vector<S>>> interpreter_run(const Program& p, Int n, std::uint64_t seed) {
  auto in = random_inputs<S>(p, n, seed);
  std::string text = std::to_string(n) + "\n";
  for (const auto& v : p.vars) {
    if (v.kind != VarKind::Input) continue;
    for (const auto& z : enumerate_points(v.domain, n)) text += value_text(in.at(v.name).at(z)) + " ";
    text += "\n";
  }
  std::vector<std::vector<S>> outs;
  auto res = evaluate(p, in, n);
  for (const auto& v : p.vars) {
    if (v.kind != VarKind::Output) continue;
    outs.emplace_back();
    for (const auto& [z, x] : res.outputs.at(v.name)) outs.back().push_back(x);
  }
  return {text, outs};
}

void expect_agrees(const Program& p, Int n, const std::string& tag) {
  auto unit = emit_c(p);
  if (p.scalar() == ScalarKind::Float) {
    auto [text, outs] = interpreter_run<double>(p, n, 11);
    std::istringstream got(run_c(unit, text, tag));
    for (const auto& row : outs)
      for (double want : row) {
        std::string tok;
        ASSERT_TRUE(got >> tok) << tag;
        double x = std::strtod(tok.c_str(), nullptr);
        if (std::isinf(want)) {
          EXPECT_EQ(x, want) << tag;
        } else {
          EXPECT_LE(std::fabs(x - want), 1e-9 * std::max(1.0, std::fabs(want))) << tag;
        }
      }
  } else {
    auto [text, outs] = interpreter_run<Exact>(p, n, 11);
    std::string want;
    for (const auto& row : outs) {
      for (std::size_t i = 0; i < row.size(); ++i) want += (i ? " " : "") + to_string(row[i]);
      want += "\n";
    }
    EXPECT_EQ(run_c(unit, text, tag), want) << tag;
  }
}

}  // namespace

TEST(EmitC, RecurrenceAccessorHasTwoBranches) {
  auto res = simplify_all(load_program("prefix_sum"));
  const Program* rec = nullptr;
  for (const auto& v : res.variants)
    if (v.program.vars.size() == 2) rec = &v.program;
  ASSERT_NE(rec, nullptr);
  auto src = emit_c(*rec).source;
  auto body = src.substr(src.find("static scalar get_Y(long long i) {"));
  body = body.substr(0, body.find("\n}\n"));
  EXPECT_NE(body.find("if (i == 0)"), std::string::npos);
  EXPECT_NE(body.find("} else if ("), std::string::npos);
  EXPECT_EQ(body.find("get_Y(i - 1)"), body.rfind("get_Y(i - 1)"));
  EXPECT_NE(body.find("get_Y(i - 1) + X_val[X_at(i)]"), std::string::npos);
  EXPECT_EQ(body.find("for ("), std::string::npos);
}

TEST(EmitC, TriangularLoopBounds) {
  auto src = emit_c(load_program("prefix_sum")).source;
  EXPECT_NE(src.find("for (long long j = 0; j <= i; ++j) {\n      acc_1 = acc_1 + X_val[X_at(i - j)];"), std::string::npos) << src;
}

TEST(EmitC, RationalUnsupported) {
  auto p = parse_program_or_throw(
      "param N;\ninput rat X : {[i] : 0 <= i < N};\noutput rat Y : {[i] : 0 <= i < N};\nY[i] = X[i];\n");
  EXPECT_EQ(thrown_code([&] { emit_c(p); }), ErrorCode::UnsupportedScalar);
}

TEST(EmitC, Stable) {
  for (const auto& name : kCorpus) {
    auto p = load_program(name);
    EXPECT_EQ(emit_c(p).source, emit_c(p).source) << name;
  }
}

TEST(EmitC, CompiledCorpusMatchesInterpreter) {
  if (!have_cc()) GTEST_SKIP() << "no C compiler on PATH";
  for (const auto& name : kCorpus) {
    auto p = load_program(name);
    Int n = name == "rna_iloops" ? 9 : 7;
    expect_agrees(p, n, name);
    auto res = simplify_all(p);
    for (std::size_t k = 0; k < res.variants.size(); ++k)
      expect_agrees(res.variants[k].program, n, std::string(name) + "_v" + std::to_string(k));
  }
}
