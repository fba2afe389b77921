// pake: demo server/client and the toy-group oracle harness.

#include <termios.h>
#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "pake/net.hpp"
#include "pake/oracle.hpp"
#include "pake/params_file.hpp"

namespace {

struct PasswordFlags {
  std::string env_var;
  std::string literal;
  bool literal_set = false;
};

std::string prompt_password() {
  std::string pw;
  const bool tty = ::isatty(STDIN_FILENO);
  termios saved{};
  if (tty) {
    std::cerr << "password: " << std::flush;
    ::tcgetattr(STDIN_FILENO, &saved);
    termios quiet = saved;
    quiet.c_lflag &= ~static_cast<tcflag_t>(ECHO);
    ::tcsetattr(STDIN_FILENO, TCSANOW, &quiet);
  }
  std::getline(std::cin, pw);
  if (tty) {
    ::tcsetattr(STDIN_FILENO, TCSANOW, &saved);
    std::cerr << '\n';
  }
  return pw;
}

std::string read_password(const PasswordFlags& f) {
  if (!f.env_var.empty()) {
    const char* v = std::getenv(f.env_var.c_str());
    if (v == nullptr) throw std::runtime_error("environment variable " + f.env_var + " is not set");
    return v;
  }
  if (f.literal_set) {
    std::cerr << "warning: --password exposes the password to other local users; use only in tests\n";
    return f.literal;
  }
  return prompt_password();
}

struct Common {
  std::string params = "modp2048";
  bool negotiate = false;
  PasswordFlags password;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> transcript;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--params", c.params, "built-in set (toy23, modp2048) or parameter file")->capture_default_str();
  cmd->add_flag("--negotiate", c.negotiate, "negotiate g and h by commit-reveal before the handshake");
  auto* env = cmd->add_option("--password-env", c.password.env_var, "read the password from this environment variable");
  auto* lit = cmd->add_option_function<std::string>(
      "--password",
      [&c](const std::string& v) {
        c.password.literal = v;
        c.password.literal_set = true;
      },
      "password on the command line (insecure, tests only)");
  env->excludes(lit);
  cmd->add_option("--seed", c.seed, "deterministic RNG seed (toy parameter sets only)");
  cmd->add_option("--transcript", c.transcript, "append hex frame transcript to this file");
}

pake::Group load_group(const Common& c) {
  pake::Group group = pake::load_params(c.params);
  if (c.seed && !pake::is_toy_scale(group))
    throw std::runtime_error("--seed is only allowed with toy parameter sets");
  return group;
}

int run_oracle(const std::string& params, std::uint64_t trials, std::uint64_t seed) {
  pake::Group group = pake::load_params(params);
  std::cout << "params " << group.name() << " p=" << group.p().get_str() << " q=" << group.q().get_str()
            << " g=" << group.g().value().get_str() << " h=" << group.h().value().get_str() << '\n';
  if (!pake::is_toy_scale(group)) {
    std::cerr << "error: oracle checks need an enumerable group (q < 2^20)\n";
    return 3;
  }
  std::cout << "note: toy parameters have a known log_g(h); they check algebra, not security\n";
  bool ok = true;
  for (const auto& rep : pake::oracle::run_all(group, trials, seed)) {
    std::cout << rep.line() << '\n';
    ok = ok && rep.passed();
  }
  std::cout << (ok ? "RESULT PASS" : "RESULT FAIL") << std::endl;
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Password-authenticated key exchange over a prime-order subgroup"};
  app.require_subcommand(1);

  Common server_opts;
  std::string listen;
  bool eager = false;
  std::optional<std::size_t> max_sessions;
  auto* server = app.add_subcommand("server", "accept password-authenticated handshakes");
  server->add_option("--listen", listen, "HOST:PORT to bind (port 0 picks a free port)")->required();
  server->add_flag("--eager", eager, "send Y2 before Y1 arrives");
  server->add_option("--max-sessions", max_sessions, "exit after this many sessions");
  add_common(server, server_opts);

  Common client_opts;
  std::string connect;
  auto* client = app.add_subcommand("client", "run one handshake against a server");
  client->add_option("--connect", connect, "HOST:PORT of the server")->required();
  add_common(client, client_opts);

  std::string oracle_params = "toy23";
  std::uint64_t trials = 100;
  std::uint64_t oracle_seed = 1;
  auto* oracle = app.add_subcommand("oracle", "exhaustive checks in a toy group");
  auto* oracle_run = oracle->add_subcommand("run", "run every check and print a report");
  oracle->require_subcommand(1);
  oracle_run->add_option("--params", oracle_params, "toy parameter set")->capture_default_str();
  oracle_run->add_option("--trials", trials, "replay trials")->capture_default_str();
  oracle_run->add_option("--seed", oracle_seed, "RNG seed for the replay experiment")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 3;
  }

  try {
    if (*oracle_run) return run_oracle(oracle_params, trials, oracle_seed);

    if (*server) {
      pake::Group group = load_group(server_opts);
      pake::net::ServerConfig cfg{
          pake::net::parse_endpoint(listen),
          group,
          pake::password_to_exponent(read_password(server_opts.password), group),
          {server_opts.negotiate, eager},
          server_opts.seed,
          max_sessions,
          server_opts.transcript,
      };
      return pake::net::run_server(cfg, std::cout, [&](std::uint16_t port) {
        std::cerr << "listening " << cfg.listen.host << ':' << port << std::endl;
      });
    }

    pake::Group group = load_group(client_opts);
    pake::net::ClientConfig cfg{
        pake::net::parse_endpoint(connect),
        group,
        pake::password_to_exponent(read_password(client_opts.password), group),
        {client_opts.negotiate, false},
        client_opts.seed,
        client_opts.transcript,
    };
    return pake::net::run_client(cfg, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
