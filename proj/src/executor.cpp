#include "chartrl/executor.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>
#include <vector>

namespace chartrl {

namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "chartrl-exec-XXXXXX").string();
    std::vector<char> buf(tmpl.begin(), tmpl.end());
    buf.push_back('\0');
    if (::mkdtemp(buf.data()) == nullptr) {
      throw std::runtime_error("cannot create temporary directory");
    }
    path_ = buf.data();
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string python_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\\' || c == '\'') {
      out += '\\';
    }
    out += c;
  }
  out += '\'';
  return out;
}

}  // namespace

ExecutionResult execute_chart_data(std::string_view code, const ExecutionSettings& settings) {
  ExecutionResult result;
  if (!settings.enabled) {
    result.diagnostic = "execution disabled";
    return result;
  }

  TempDir dir;
  const fs::path script = dir.path() / "snippet.py";
  const fs::path output = dir.path() / "chart_data.csv";
  {
    std::ofstream out(script, std::ios::binary);
    out << code << "\n\n"
        << "import pandas as _chartrl_pd\n"
        << "_chartrl_pd.DataFrame(chart_data).to_csv(" << python_quote(output.string()) << ", index=False)\n";
    if (!out) {
      result.diagnostic = "cannot write snippet";
      return result;
    }
  }

  const pid_t pid = ::fork();
  if (pid < 0) {
    result.diagnostic = "fork failed";
    return result;
  }
  if (pid == 0) {
    ::setpgid(0, 0);
    const int devnull = ::open("/dev/null", O_RDWR);
    if (devnull >= 0) {
      ::dup2(devnull, STDIN_FILENO);
      ::dup2(devnull, STDOUT_FILENO);
      ::dup2(devnull, STDERR_FILENO);
    }
    if (::chdir(dir.path().c_str()) != 0) {
      ::_exit(126);
    }
    const std::string interp = settings.interpreter;
    const std::string script_path = script.string();
    ::execlp(interp.c_str(), interp.c_str(), script_path.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::setpgid(pid, pid);

  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                            std::chrono::duration<double>(settings.timeout_seconds));
  int status = 0;
  bool timed_out = false;
  while (true) {
    const pid_t r = ::waitpid(pid, &status, WNOHANG);
    if (r == pid) {
      break;
    }
    if (r < 0) {
      result.diagnostic = "waitpid failed";
      return result;
    }
    if (std::chrono::steady_clock::now() >= deadline) {
      ::kill(-pid, SIGKILL);
      ::kill(pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      timed_out = true;
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }

  if (timed_out) {
    result.diagnostic = "execution timed out";
    return result;
  }
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    result.diagnostic = WIFEXITED(status) ? "execution failed (exit " + std::to_string(WEXITSTATUS(status)) + ")"
                                          : "execution killed by signal";
    return result;
  }

  std::ifstream in(output, std::ios::binary);
  if (!in) {
    result.diagnostic = "no chart_data output";
    return result;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    result.table = parse_csv(buf.str());
  } catch (const CsvError& err) {
    result.diagnostic = std::string("unreadable chart_data output: ") + err.what();
  }
  return result;
}

}  // namespace chartrl
