#pragma once

#include <memory>
#include <span>
#include <string>

#include "sf/codegen.hpp"

namespace sf {

// A loaded shared library with a resolved entry point. Handles stay open for
// the process lifetime (cached by source hash).
class CompiledKernel {
  public:
    CompiledKernel(void* handle, void* fn, KernelSignature sig,
                   std::string lib_path);

    // All kernel arguments are flat buffer pointers; returns the entry's
    // integer status (0 = success).
    int invoke(std::span<void* const> args) const;

    const KernelSignature& signature() const { return sig_; }
    const std::string& library_path() const { return lib_path_; }

  private:
    void* handle_;
    void* fn_;
    KernelSignature sig_;
    std::string lib_path_;
};

// Compile one translation unit into a shared library, load it and resolve
// the entry symbol. Results are cached per process by a hash of source and
// toolchain command, so identical source compiles once.
std::shared_ptr<CompiledKernel> jit_compile(const std::string& source,
                                            const CodegenConfig& cfg,
                                            KernelSignature sig);

// Number of toolchain invocations so far (cache misses).
long jit_compile_count();

// Resolved compiler executable for a config: STENCILFORGE_CC, then the
// explicit override, then the preset default. Throws ToolchainNotFound when
// the executable cannot be located.
std::string resolve_toolchain(const CodegenConfig& cfg);

// Remove the per-process scratch directory holding sources and libraries.
void clear_jit_workspace();

} // namespace sf
