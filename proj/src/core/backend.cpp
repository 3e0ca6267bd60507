#include "lfpb/backend.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstring>
#include <mutex>
#include <sstream>

#include "lfpb/error.hpp"
#include "lfpb/io.hpp"
#include "lfpb/resample.hpp"

namespace lfpb {

Image IdentityBackend::restore(const Image& image, int) const { return image; }

SharpenBackend::SharpenBackend(SharpenParams params) : params_(params) {
  if (params_.iterations < 0 || params_.sigma_per_scale <= 0.0 || params_.gain_clamp < 0.0) {
    throw UsageError("invalid sharpen parameters");
  }
}

Image SharpenBackend::restore(const Image& image, int alpha) const {
  if (alpha < 1) throw UsageError("sharpen: alpha must be >= 1");
  const double sigma = params_.sigma_per_scale * alpha;
  Image x = image;
  const float limit = static_cast<float>(params_.gain_clamp);
  for (int it = 0; it < params_.iterations; ++it) {
    const Image blurred = gaussian_blur(x, sigma);
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double next = x.data[k] + params_.step * (image.data[k] - blurred.data[k]);
      const float delta = std::clamp(static_cast<float>(next) - image.data[k], -limit, limit);
      x.data[k] = image.data[k] + delta;
    }
  }
  clamp_inplace(x);
  return x;
}

namespace {

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  Fd(Fd&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Fd& operator=(Fd&& o) noexcept {
    reset();
    fd_ = std::exchange(o.fd_, -1);
    return *this;
  }
  ~Fd() { reset(); }
  int get() const { return fd_; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

struct Pipe {
  Fd read;
  Fd write;
};

Pipe make_pipe() {
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) {
    throw BackendError(ErrorKind::backend_spawn,
                       std::string("cannot create pipe: ") + std::strerror(errno));
  }
  return {Fd(fds[0]), Fd(fds[1])};
}

std::string join(const std::vector<std::string>& argv) {
  std::string out;
  for (const auto& a : argv) {
    if (!out.empty()) out += ' ';
    out += a;
  }
  return out;
}

void set_nonblocking(int fd) { ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL) | O_NONBLOCK); }

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

}  // namespace

Image run_external_backend(const Image& image, int alpha, const std::vector<std::string>& argv,
                           std::chrono::milliseconds timeout) {
  if (argv.empty()) throw UsageError("external backend: empty command");
  ignore_sigpipe();
  std::vector<std::string> args = argv;
  args.push_back("--scale");
  args.push_back(std::to_string(alpha));
  std::vector<char*> cargv;
  for (auto& a : args) cargv.push_back(a.data());
  cargv.push_back(nullptr);
  const std::string command = join(args);

  Pipe in = make_pipe();
  Pipe out = make_pipe();
  Pipe err = make_pipe();
  Pipe exec_status = make_pipe();

  const pid_t pid = ::fork();
  if (pid < 0) {
    throw BackendError(ErrorKind::backend_spawn,
                       "cannot fork for '" + command + "': " + std::strerror(errno));
  }
  if (pid == 0) {
    ::dup2(in.read.get(), STDIN_FILENO);
    ::dup2(out.write.get(), STDOUT_FILENO);
    ::dup2(err.write.get(), STDERR_FILENO);
    ::execvp(cargv[0], cargv.data());
    const int code = errno;
    ssize_t ignored = ::write(exec_status.write.get(), &code, sizeof code);
    (void)ignored;
    ::_exit(127);
  }
  in.read.reset();
  out.write.reset();
  err.write.reset();
  exec_status.write.reset();

  int exec_errno = 0;
  ssize_t got;
  do {
    got = ::read(exec_status.read.get(), &exec_errno, sizeof exec_errno);
  } while (got < 0 && errno == EINTR);
  if (got == static_cast<ssize_t>(sizeof exec_errno)) {
    ::waitpid(pid, nullptr, 0);
    throw BackendError(ErrorKind::backend_spawn,
                       "cannot start backend '" + argv.front() + "': " + std::strerror(exec_errno));
  }

  const std::string input = encode_pgm16(image);
  std::size_t written = 0;
  std::string stdout_bytes;
  std::string stderr_bytes;
  set_nonblocking(in.write.get());
  set_nonblocking(out.read.get());
  set_nonblocking(err.read.get());

  const auto deadline = std::chrono::steady_clock::now() + timeout;
  char buf[65536];
  bool timed_out = false;
  while (out.read.get() >= 0 || err.read.get() >= 0) {
    std::vector<pollfd> fds;
    if (in.write.get() >= 0) fds.push_back({in.write.get(), POLLOUT, 0});
    if (out.read.get() >= 0) fds.push_back({out.read.get(), POLLIN, 0});
    if (err.read.get() >= 0) fds.push_back({err.read.get(), POLLIN, 0});
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      timed_out = true;
      break;
    }
    const int ready = ::poll(fds.data(), fds.size(), static_cast<int>(std::min<long long>(left.count(), 1000)));
    if (ready < 0) {
      if (errno == EINTR) continue;
      break;
    }
    for (const pollfd& p : fds) {
      if (p.revents == 0) continue;
      if (p.fd == in.write.get()) {
        const ssize_t n = ::write(p.fd, input.data() + written, input.size() - written);
        if (n > 0) written += static_cast<std::size_t>(n);
        if ((n < 0 && errno != EAGAIN && errno != EINTR) || written == input.size()) {
          in.write.reset();
        }
      } else {
        const ssize_t n = ::read(p.fd, buf, sizeof buf);
        if (n > 0) {
          (p.fd == out.read.get() ? stdout_bytes : stderr_bytes).append(buf, static_cast<std::size_t>(n));
        } else if (n == 0 || (errno != EAGAIN && errno != EINTR)) {
          if (p.fd == out.read.get()) out.read.reset(); else err.read.reset();
        }
      }
    }
  }
  if (timed_out) {
    ::kill(pid, SIGKILL);
    ::waitpid(pid, nullptr, 0);
    throw BackendError(ErrorKind::backend_timeout,
                       "backend '" + command + "' timed out after " +
                           std::to_string(timeout.count()) + " ms",
                       stderr_bytes);
  }
  in.write.reset();
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    std::string detail = stderr_bytes;
    while (!detail.empty() && std::isspace(static_cast<unsigned char>(detail.back()))) detail.pop_back();
    const std::string how = WIFEXITED(status)
                                ? "exited with status " + std::to_string(WEXITSTATUS(status))
                                : "terminated by signal " + std::to_string(WTERMSIG(status));
    throw BackendError(ErrorKind::backend_exit,
                       "backend '" + command + "' " + how +
                           (detail.empty() ? std::string() : ": " + detail),
                       stderr_bytes);
  }
  Image result;
  try {
    result = decode_pgm(stdout_bytes);
  } catch (const DataError& e) {
    throw BackendError(ErrorKind::backend_format,
                       "backend '" + command + "' produced malformed output: " + e.what(),
                       stderr_bytes);
  }
  if (!result.same_shape(image)) {
    throw BackendError(ErrorKind::backend_dims,
                       "backend dim mismatch (got " + shape_string(result.width, result.height) +
                           ", want " + shape_string(image.width, image.height) + ")",
                       stderr_bytes);
  }
  return result;
}

ExternalBackend::ExternalBackend(std::vector<std::string> argv, std::chrono::milliseconds timeout)
    : argv_(std::move(argv)), timeout_(timeout) {
  if (argv_.empty()) throw UsageError("external backend: empty command");
}

Image ExternalBackend::restore(const Image& image, int alpha) const {
  return run_external_backend(image, alpha, argv_, timeout_);
}

std::string ExternalBackend::name() const { return "external:" + join(argv_); }

std::unique_ptr<SisrBackend> make_backend(const std::string& spec,
                                          std::chrono::milliseconds timeout) {
  if (spec == "identity") return std::make_unique<IdentityBackend>();
  if (spec == "sharpen") return std::make_unique<SharpenBackend>();
  constexpr std::string_view prefix = "external:";
  if (spec.rfind(prefix, 0) == 0) {
    std::istringstream words(spec.substr(prefix.size()));
    std::vector<std::string> argv;
    for (std::string w; words >> w;) argv.push_back(w);
    if (argv.empty()) throw UsageError("external backend needs a command: '" + spec + "'");
    return std::make_unique<ExternalBackend>(std::move(argv), timeout);
  }
  throw UsageError("unknown backend '" + spec + "' (identity, sharpen, external:<cmd>)");
}

}  // namespace lfpb
