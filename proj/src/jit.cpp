#include "sf/jit.hpp"

#include <dlfcn.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include "sf/error.hpp"

namespace sf {

namespace fs = std::filesystem;

namespace {

std::mutex g_mutex;
std::map<std::string, std::shared_ptr<CompiledKernel>> g_cache;
long g_compile_count = 0;

std::string hash_hex(const std::string& text) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

fs::path workspace() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() /
                     ("stencilforge-jit-" + std::to_string(getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

bool executable_exists(const std::string& exe) {
    if (exe.find('/') != std::string::npos)
        return access(exe.c_str(), X_OK) == 0;
    const char* path = std::getenv("PATH");
    if (!path) return false;
    std::stringstream ss(path);
    std::string dir;
    while (std::getline(ss, dir, ':')) {
        if (dir.empty()) continue;
        if (access((dir + "/" + exe).c_str(), X_OK) == 0) return true;
    }
    return false;
}

std::string preset_executable(const std::string& preset) {
    if (preset == "gcc") return "gcc";
    if (preset == "clang") return "clang";
    if (preset == "vendor") return "icx";
    return preset; // allow an explicit executable in place of a preset name
}

std::string build_command(const std::string& exe, const CodegenConfig& cfg,
                          const fs::path& src, const fs::path& lib) {
    std::string cmd = exe;
    cmd += " -std=c99 -O3 -march=native -fPIC -shared -ffp-contract=off";
    if (cfg.parallel) {
        // clang defaults to libomp, which is commonly absent; the GNU
        // runtime is what the host process already links
        bool clang_like = exe.find("clang") != std::string::npos;
        cmd += clang_like ? " -fopenmp=libgomp" : " -fopenmp";
    }
    for (const std::string& f : cfg.extra_flags) cmd += " " + f;
    cmd += " -o " + lib.string() + " " + src.string() + " -lm";
    return cmd;
}

} // namespace

std::string resolve_toolchain(const CodegenConfig& cfg) {
    std::string exe;
    if (const char* env = std::getenv("STENCILFORGE_CC"); env && *env)
        exe = env;
    else if (!cfg.cc_override.empty())
        exe = cfg.cc_override;
    else
        exe = preset_executable(cfg.preset);
    if (!executable_exists(exe))
        throw ToolchainNotFoundError("compiler executable not found: " + exe);
    return exe;
}

CompiledKernel::CompiledKernel(void* handle, void* fn, KernelSignature sig,
                               std::string lib_path)
    : handle_(handle),
      fn_(fn),
      sig_(std::move(sig)),
      lib_path_(std::move(lib_path)) {}

int CompiledKernel::invoke(std::span<void* const> a) const {
    using P = void*;
    switch (a.size()) {
        case 1:
            return reinterpret_cast<int (*)(P)>(fn_)(a[0]);
        case 2:
            return reinterpret_cast<int (*)(P, P)>(fn_)(a[0], a[1]);
        case 3:
            return reinterpret_cast<int (*)(P, P, P)>(fn_)(a[0], a[1], a[2]);
        case 4:
            return reinterpret_cast<int (*)(P, P, P, P)>(fn_)(a[0], a[1], a[2],
                                                              a[3]);
        case 5:
            return reinterpret_cast<int (*)(P, P, P, P, P)>(fn_)(
                a[0], a[1], a[2], a[3], a[4]);
        case 6:
            return reinterpret_cast<int (*)(P, P, P, P, P, P)>(fn_)(
                a[0], a[1], a[2], a[3], a[4], a[5]);
        case 7:
            return reinterpret_cast<int (*)(P, P, P, P, P, P, P)>(fn_)(
                a[0], a[1], a[2], a[3], a[4], a[5], a[6]);
        case 8:
            return reinterpret_cast<int (*)(P, P, P, P, P, P, P, P)>(fn_)(
                a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7]);
        case 9:
            return reinterpret_cast<int (*)(P, P, P, P, P, P, P, P, P)>(fn_)(
                a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7], a[8]);
        case 10:
            return reinterpret_cast<int (*)(P, P, P, P, P, P, P, P, P, P)>(
                fn_)(a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7], a[8],
                     a[9]);
        case 11:
            return reinterpret_cast<int (*)(P, P, P, P, P, P, P, P, P, P, P)>(
                fn_)(a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7], a[8],
                     a[9], a[10]);
        case 12:
            return reinterpret_cast<
                int (*)(P, P, P, P, P, P, P, P, P, P, P, P)>(fn_)(
                a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7], a[8], a[9],
                a[10], a[11]);
        default:
            throw SignatureMismatchError(
                "unsupported kernel arity: " + std::to_string(a.size()));
    }
}

std::shared_ptr<CompiledKernel> jit_compile(const std::string& source,
                                            const CodegenConfig& cfg,
                                            KernelSignature sig) {
    std::string exe = resolve_toolchain(cfg);

    std::string flags;
    for (const std::string& f : cfg.extra_flags) flags += f + " ";
    std::string key = hash_hex(source + "\x1f" + exe + "\x1f" + flags +
                               (cfg.parallel ? "omp" : "seq") + cfg.entry);

    std::lock_guard<std::mutex> lock(g_mutex);
    if (auto it = g_cache.find(key); it != g_cache.end()) return it->second;

    fs::path src = workspace() / ("kernel_" + key + ".c");
    fs::path lib = workspace() / ("kernel_" + key + ".so");
    fs::path log = workspace() / ("kernel_" + key + ".log");
    {
        std::ofstream out(src);
        out << source;
        if (!out) throw IoError("cannot write " + src.string());
    }

    std::string cmd =
        build_command(exe, cfg, src, lib) + " 2> " + log.string();
    ++g_compile_count;
    int rc = std::system(cmd.c_str());
    if (rc != 0) {
        std::ifstream in(log);
        std::stringstream diag;
        diag << in.rdbuf();
        throw CompileFailedError("toolchain failed (" + cmd + "):\n" +
                                 diag.str());
    }

    void* handle = dlopen(lib.c_str(), RTLD_NOW | RTLD_LOCAL);
    if (!handle)
        throw CompileFailedError(std::string("dlopen failed: ") + dlerror());
    void* fn = dlsym(handle, cfg.entry.c_str());
    if (!fn)
        throw SymbolNotFoundError("entry symbol not found: " + cfg.entry);

    auto kernel = std::make_shared<CompiledKernel>(handle, fn, std::move(sig),
                                                   lib.string());
    g_cache.emplace(key, kernel);
    return kernel;
}

long jit_compile_count() {
    std::lock_guard<std::mutex> lock(g_mutex);
    return g_compile_count;
}

void clear_jit_workspace() {
    std::lock_guard<std::mutex> lock(g_mutex);
    g_cache.clear();
    std::error_code ec;
    fs::remove_all(workspace(), ec);
}

} // namespace sf
