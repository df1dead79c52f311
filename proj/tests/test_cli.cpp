#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mso/cli.hpp"

using namespace mso;

namespace {

struct RunResult {
  int code;
  std::string out, err;
};

RunResult run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code = cli_run(args, out, err);
  return {code, out.str(), err.str()};
}

struct TempFile {
  std::string path;
  TempFile(const std::string& name, const std::string& content) {
    path = std::string("cli_test_") + name;
    std::ofstream f(path);
    f << content;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("theory subcommand prints the canonical serialization") {
  TempFile f("fin3.chain", "chain 3\n");
  auto r = run({"theory", "--chain", f.path, "-n", "1"});
  CHECK(r.code == 0);
  CHECK(r.out ==
        "{[empty(X0),sub(X0,X0)],[sing(X0),sub(X0,X0)],[sub(X0,X0)]}\n");
  // byte-identical across runs
  CHECK(run({"theory", "--chain", f.path, "-n", "1"}).out == r.out);
}

TEST_CASE("decide over an ordinal") {
  auto r = run({"decide", "--ordinal", "w^2", "--formula",
                "EX X. (sing(X) & ALL Y.(sing(Y) -> (X=Y | X<Y)))"});
  CHECK(r.code == 0);
  CHECK(r.out == "true\n");
  auto r2 = run({"decide", "--ordinal", "w", "--formula",
                 "EX X. (sing(X) & ALL Y.(sing(Y) -> (X=Y | Y<X)))"});
  CHECK(r2.out == "false\n");
}

TEST_CASE("decide over a structure with named sets") {
  TempFile f("named.chain", "chain 3\nA 0 1\n");
  auto r = run({"decide", "--chain", f.path, "--formula", "EX X. (sing(X) & X sub A)"});
  CHECK(r.code == 0);
  CHECK(r.out == "true\n");
}

TEST_CASE("ordinal subcommands") {
  CHECK(run({"ordinal", "parttype", "--alpha", "w+1", "--classes", "[w,w+1) ; [0,w)"})
            .out == "w\n");
  CHECK(run({"ordinal", "add", "--a", "w", "--b", "w^2"}).out == "w^2\n");
  CHECK(run({"ordinal", "leftsub", "--a", "w", "--b", "w*2 + 3"}).out == "w + 3\n");
  CHECK(run({"ordinal", "log", "--a", "w^2*3 + w"}).out == "2\n");
  auto r = run({"ordinal", "decomp", "--a", "w+1", "--b", "w"});
  CHECK(r.out == "w ; 1\n");
}

TEST_CASE("compose subcommand") {
  std::string point = "{[empty(X0),sub(X0,X0)],[sing(X0),sub(X0,X0)]}";
  auto r = run({"compose", "--theory", point, "--theory", point});
  CHECK(r.code == 0);
  CHECK(r.out ==
        "{[empty(X0),sub(X0,X0)],[sing(X0),sub(X0,X0)],[sub(X0,X0)]}\n");
  auto w = run({"compose", "--omega", "--theory", point});
  CHECK(w.code == 0);
  CHECK(w.out ==
        "{[empty(X0),sub(X0,X0)],[sing(X0),sub(X0,X0)],[sub(X0,X0)]}\n");
}

TEST_CASE("types subcommand") {
  auto r = run({"types", "-n", "0", "-l", "1"});
  CHECK(r.code == 0);
  CHECK(r.out.substr(0, 2) == "3\n");
}

TEST_CASE("ramsey subcommand") {
  TempFile f("parity.col",
             "elements: e o\ne e e\ne o o\no e o\no o e\nchain 10\n"
             "steps: o o o o o o o o o\n");
  auto r = run({"ramsey", "--file", f.path, "--size", "3"});
  CHECK(r.code == 0);
  CHECK(r.out == "0 2 4\n");
}

TEST_CASE("tower subcommand") {
  TempFile f("fin1.chain", "chain 1\n");
  auto r = run({"tower", "--chain", f.path, "-n", "1", "--depth", "3"});
  CHECK(r.code == 0);
  CHECK(r.out.find("stabilizes p=1 idempotent=yes next-equation=yes") !=
        std::string::npos);
}

TEST_CASE("wellorder subcommands") {
  auto r = run({"wellorder-chain", "--term", "(omegasum (prefix) (period (rev omega)))",
                "--samples", "100"});
  CHECK(r.code == 0);
  CHECK(r.out.find("degree 2") != std::string::npos);
  CHECK(r.out.find("parameters 1") != std::string::npos);
  CHECK(r.out.find("verification pass (100 pairs)") != std::string::npos);

  TempFile f("t3.tree", "0 -\n1 0\n2 0\n");
  auto t = run({"wellorder-tree", "--tree", f.path});
  CHECK(t.code == 0);
  CHECK(t.out.find("order 0 1 2") != std::string::npos);
}

TEST_CASE("uniformize subcommand") {
  TempFile f("c3.chain", "chain 3\n");
  auto r = run({"uniformize", "--chain", f.path, "--formula",
                "(empty(Y) & empty(X)) | (sing(X) & X sub Y)"});
  CHECK(r.code == 0);
  CHECK(r.out.find("Y={1,2} X={1}") != std::string::npos);
}

TEST_CASE("error handling and exit codes") {
  // missing file
  auto r = run({"theory", "--chain", "/nonexistent.chain", "-n", "1"});
  CHECK(r.code == 1);
  CHECK(!r.err.empty());
  CHECK(r.out.empty());
  // domain error names the violated precondition
  auto d = run({"ordinal", "log", "--a", "0"});
  CHECK(d.code == 1);
  CHECK(d.err.find("log of 0") != std::string::npos);
  // budget exhaustion
  TempFile f("c4.chain", "chain 4\n");
  auto b = run({"--budget", "10", "theory", "--chain", f.path, "-n", "2"});
  CHECK(b.code == 2);
  // malformed formula reports a position
  auto s = run({"decide", "--ordinal", "w", "--formula", "sing(X"});
  CHECK(s.code == 1);
  CHECK(s.err.find("offset") != std::string::npos);
  // unknown subcommand
  CHECK(run({"frobnicate"}).code == 1);
}

TEST_CASE("json output") {
  auto r = run({"--json", "decide", "--ordinal", "w", "--formula", "EX X. sing(X)"});
  CHECK(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["result"] == true);
}
