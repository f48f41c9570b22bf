#pragma once

namespace trav {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;    // bad flags or unwritable path
inline constexpr int kExitNoAec = 3;    // tmedirl on a dataset without AEC labels
inline constexpr int kExitNumeric = 4;  // non-finite values during training
inline constexpr int kExitShape = 5;    // checkpoint/data mismatch or missing test split

/// Entry point of the `trav` tool (gen | train | eval | render).
int run_cli(int argc, char** argv);

}  // namespace trav
