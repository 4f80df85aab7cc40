#include "hiqa/plugin.hpp"

#include <cerrno>
#include <cmath>
#include <csignal>
#include <cstring>
#include <ctime>

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

namespace hiqa {
using nlohmann::json;

namespace {

std::string errno_text() { return std::strerror(errno); }

// Writes with SIGPIPE blocked so a dead child surfaces as EPIPE instead of killing us.
ssize_t write_no_sigpipe(int fd, const char* data, std::size_t len) {
  sigset_t block, old;
  sigemptyset(&block);
  sigaddset(&block, SIGPIPE);
  pthread_sigmask(SIG_BLOCK, &block, &old);
  const ssize_t n = ::write(fd, data, len);
  const int saved = errno;
  if (n < 0 && saved == EPIPE) {
    const timespec zero{0, 0};
    sigtimedwait(&block, nullptr, &zero);
  }
  pthread_sigmask(SIG_SETMASK, &old, nullptr);
  errno = saved;
  return n;
}

json checked(const json& response, const char* field) {
  if (response.is_object() && response.contains("error")) {
    throw PluginError("plug-in reported an error: " + response["error"].dump());
  }
  if (!response.is_object() || !response.contains(field)) {
    throw PluginError(std::string("plug-in response lacks '") + field + "'");
  }
  return response[field];
}

}  // namespace

ProcessChannel::ProcessChannel(std::string command) : command_(std::move(command)) {
  int in_pipe[2];
  int out_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw PluginError("pipe failed: " + errno_text());
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw PluginError("pipe failed: " + errno_text());
  }
  const pid_t pid = ::fork();
  if (pid < 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) ::close(fd);
    throw PluginError("fork failed: " + errno_text());
  }
  if (pid == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
}

ProcessChannel::~ProcessChannel() {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  if (pid_ > 0) {
    int status = 0;
    while (::waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
    }
  }
}

void ProcessChannel::write_all(const std::string& bytes) {
  std::size_t off = 0;
  while (off < bytes.size()) {
    const ssize_t n = write_no_sigpipe(to_child_, bytes.data() + off, bytes.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw PluginError("plug-in '" + command_ + "' closed its input: " + errno_text());
    }
    off += static_cast<std::size_t>(n);
  }
}

std::string ProcessChannel::read_line() {
  while (true) {
    const auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    char chunk[4096];
    const ssize_t n = ::read(from_child_, chunk, sizeof chunk);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw PluginError("plug-in '" + command_ + "' exited without answering");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

json ProcessChannel::request(const json& message) {
  write_all(message.dump() + "\n");
  const std::string line = read_line();
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw PluginError("plug-in '" + command_ + "' sent invalid JSON: " + e.what());
  }
}

ProcessEmbedder::ProcessEmbedder(std::string command, std::size_t dim) : dim_(dim), channel_(std::move(command)) {
  if (dim == 0) throw InvalidParameter("embedding dimension must be positive");
}

std::string ProcessEmbedder::name() const { return "process-" + std::to_string(dim_) + ":" + channel_.command(); }

Embedding ProcessEmbedder::embed(std::string_view text) const {
  json vec;
  {
    std::lock_guard lock(mutex_);
    vec = checked(channel_.request({{"text", std::string(text)}}), "vector");
  }
  if (!vec.is_array() || vec.size() != dim_) {
    throw PluginError("embedder returned " + std::to_string(vec.size()) + " components, expected " +
                      std::to_string(dim_));
  }
  std::vector<double> values = vec.get<std::vector<double>>();
  double sq = 0.0;
  for (double v : values) sq += v * v;
  Embedding out;
  out.values.assign(dim_, 0.0f);
  if (!(sq > 0.0) || !std::isfinite(sq)) return out;
  const double inv = 1.0 / std::sqrt(sq);
  for (std::size_t i = 0; i < dim_; ++i) out.values[i] = static_cast<float>(values[i] * inv);
  out.embeddable = true;
  return out;
}

std::set<std::string> ProcessKeywordExtractor::extract(std::string_view text) const {
  std::lock_guard lock(mutex_);
  return checked(channel_.request({{"text", std::string(text)}}), "keywords").get<std::set<std::string>>();
}

std::string ProcessCaptioner::caption(std::string_view file_ref, std::string_view context) {
  return checked(channel_.request({{"file", std::string(file_ref)}, {"text", std::string(context)}}), "description").get<std::string>();
}

std::string ProcessConverter::convert(const ConverterTurn& turn) {
  const json msg{{"turn", turn.turn},
                 {"current_input", turn.current_input},
                 {"previous_input", turn.previous_input},
                 {"previous_output", turn.previous_output},
                 {"core_begin", turn.core_begin},
                 {"core_end", turn.core_end}};
  return checked(channel_.request(msg), "markdown").get<std::string>();
}

std::string ProcessAnswerer::answer(const json& context_bundle) {
  return checked(channel_.request(context_bundle), "answer").get<std::string>();
}

}  // namespace hiqa
