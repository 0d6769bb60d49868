#include <doctest.h>
#include <json.hpp>
#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <string>

namespace {

struct Run {
    int code;
    std::string out;
    nlohmann::json json() const { return nlohmann::json::parse(out); }
};

Run run(const std::string& args, const std::string& prefix = "") {
    const std::string cmd = prefix + " '" FATOULAB_BIN "' " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    std::array<char, 4096> buf;
    for (std::size_t n; (n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0;) out.append(buf.data(), n);
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

}  // namespace

TEST_CASE("check-fs on z^2 + 1/4") {
    const Run r = run("check-fs --map 'z^2+1/4' --period-max 2 --iter-cap 1000");
    CHECK(r.code == 0);
    const auto j = r.json();
    CHECK(j["schema"] == "fatoulab/1");
    CHECK(j["gamma_partial"] == 1);
    CHECK(j["delta"] == 1);
    CHECK(j["verdict"] == "PASS");
    CHECK(j["equality"] == true);
    CHECK(j["config"]["period_max"] == 2);
    CHECK(j["config"]["iter_cap"] == 1000);
    CHECK(j["config"]["precision_bits"] == 256);
    CHECK(j["config"]["tolerances"].contains("eps_cluster"));
    CHECK(j["metadata"]["version"].is_string());
}

TEST_CASE("lattes on z^2") {
    const Run r = run("lattes --map 'z^2'");
    CHECK(r.code == 0);
    CHECK(r.json()["verdict"] == "NotLattes");
}

TEST_CASE("parabolic invariants at 1/2") {
    const Run r = run("parabolic --map 'z^2+1/4' --point '1/2'");
    CHECK(r.code == 0);
    const auto j = r.json();
    CHECK(j["n"] == 1);
    CHECK(j["N"] == 1);
    CHECK(j["nu"] == 1);
    CHECK(j["iota"] == "0");
    CHECK(j["beta"] == "1");
    CHECK(j["subtype"] == "parabolic-repelling");
    CHECK(j["gamma"] == 1);
}

TEST_CASE("usage errors exit 1") {
    const Run syntax = run("cycles --map 'z^2 + $'");
    CHECK(syntax.code == 1);
    CHECK(syntax.json()["error"]["kind"] == "SyntaxError");
    CHECK(syntax.json()["error"]["position"] == 6);
    CHECK(run("cycles --map 'z^z'").code == 1);
    CHECK(run("check-fs --map 'z + 1'").code == 1);
    CHECK(run("qd-push --map 'z^2'").code == 1);
    CHECK(run("nabla --map 'z^2'").code == 1);
    CHECK(run("frobnicate --map 'z^2'").code == 1);
    CHECK(run("cycles").code == 1);
    CHECK(run("cycles --map z^2 --format xml").code == 1);
    CHECK(run("cycles --map z^2", "FATOULAB_PRECISION=abc").code == 1);
}

TEST_CASE("numerical failures exit 2") {
    const Run r = run("parabolic --map 'z^2' --point 1");
    CHECK(r.code == 2);
    CHECK(r.json()["error"]["kind"].is_string());
    CHECK(run("gamma --map 'z^2+1/4' --period-max 20").code == 2);
}

TEST_CASE("determinism") {
    const std::string args = "check-fs --map 'z^2-1' --period-max 3 --iter-cap 200";
    const Run a = run(args), b = run(args);
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
}

TEST_CASE("stdin, environment and table output") {
    const Run s = run("check-fs --map - --period-max 2", "printf 'z^2+1/4' |");
    CHECK(s.code == 0);
    CHECK(s.json()["map"]["expression"] == "z^2 + 1/4");

    CHECK(run("delta --map 'z^2+i'", "FATOULAB_PRECISION=128").json()["config"]["precision_bits"] == 128);
    CHECK(run("delta --map 'z^2+i' --precision 192", "FATOULAB_PRECISION=128").json()["config"]["precision_bits"] ==
          192);
    const auto eps = run("delta --map 'z^2+i' --eps-cluster 1e-12").json();
    CHECK(eps["config"]["tolerances"]["eps_cluster"] == "9.9999999999999998e-13");

    const Run t = run("check-fs --map 'z^2+1/4' --format table");
    CHECK(t.code == 0);
    CHECK(t.out.find("verdict: PASS") != std::string::npos);
    CHECK(t.out.find("gamma_partial: 1") != std::string::npos);
}

TEST_CASE("differential commands") {
    const auto push = run("qd-push --map 'z^2' --qd '1/((z^2-1)*(z^2-4))'").json();
    CHECK(push["result"]["expression"] == "(1/2)/(z^3 - 5*z^2 + 4*z)");
    const auto pull = run(R"(qd-pull --map 'z^2' --qd '{"num": ["1"], "den": [0, 0, 1]}')").json();
    CHECK(pull["result"]["expression"] == "(4)/(z^2)");
    const auto lat = run("lattes --map '(z^2+1)^2/(4*z*(z^2-1))'").json();
    CHECK(lat["verdict"] == "Lattes");
    CHECK(lat["witness"]["expression"] == "(1)/(z^3 - z)");
}
