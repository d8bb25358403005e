// Error-path checks for the command-line surface: exit codes and single-line
// machine-parseable error output.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

int failures = 0;

struct Outcome {
    int exit_code;
    std::string stderr_text;
};

Outcome run_cli(const std::string& args) {
    const fs::path err_file = fs::temp_directory_path() / "pro_ood_cli_stderr.txt";
    const std::string cmd = std::string(PRO_OOD_CLI_PATH) + " " + args + " > /dev/null 2> " +
                            err_file.string();
    const int status = std::system(cmd.c_str());
    std::ifstream f(err_file);
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    fs::remove(err_file);
    const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return {code, text};
}

void expect(const std::string& name, const Outcome& got, int want_code,
            const std::string& want_substr) {
    const bool code_ok = got.exit_code == want_code;
    const bool text_ok = want_substr.empty() ||
                         got.stderr_text.find(want_substr) != std::string::npos;
    if (code_ok && text_ok) {
        std::cout << "[ok] " << name << "\n";
    } else {
        ++failures;
        std::cout << "[FAIL] " << name << ": exit=" << got.exit_code << " (want " << want_code
                  << "), stderr=\"" << got.stderr_text << "\" (want substring \"" << want_substr
                  << "\")\n";
    }
}

}  // namespace

int main() {
    const fs::path base = fs::temp_directory_path() / "pro_ood_cli_cases";
    fs::remove_all(base);
    fs::create_directories(base);

    // Working artifacts for the positive-path prerequisites.
    const std::string suite_dir = (base / "suite").string();
    const std::string model_dir = (base / "model").string();
    Outcome gen = run_cli("gen-data --preset desk --seed 3 --train-per-class 20"
                          " --val-per-class 10 --test-per-class 10 --ood-n 40 --ood-val-n 20"
                          " --out-dir " + suite_dir);
    expect("gen-data succeeds", gen, 0, "");
    Outcome tr = run_cli("train --data " + suite_dir + "/ind_train.bin --epochs 5 --out-dir " +
                         model_dir);
    expect("train succeeds", tr, 0, "");

    expect("help exits zero", run_cli("--help"), 0, "");
    expect("version exits zero", run_cli("--version"), 0, "");

    expect("unknown detector is a validation error listing valid names",
           run_cli("eval --weights " + model_dir + "/weights.json --suite " + suite_dir +
                   " --detectors nope --out-dir " + (base / "e1").string()),
           2, "pro-msp");

    expect("missing weights file is an io error",
           run_cli("eval --weights " + (base / "missing.json").string() + " --suite " +
                   suite_dir + " --out-dir " + (base / "e2").string()),
           4, "error: io");

    expect("missing required flag is a validation error",
           run_cli("train --epochs 5"), 2, "error: validation");

    expect("unknown data preset is a validation error",
           run_cli("gen-data --preset huge --out-dir " + (base / "e3").string()),
           2, "error: validation");

    // relu has no saturation to absorb an absurd learning rate, so the loss
    // genuinely overflows.
    expect("divergent training is a numeric error naming the epoch",
           run_cli("train --data " + suite_dir + "/ind_train.bin --epochs 5 --lr 1e12"
                   " --activation relu --out-dir " + (base / "e4").string()),
           3, "diverged at epoch");

    expect("even landscape grid is a validation error",
           run_cli("landscape --weights " + model_dir + "/weights.json --data " + suite_dir +
                   "/ind_test.bin --grid-n 10 --out-dir " + (base / "e5").string()),
           2, "error: validation");

    // Malformed dataset file: parse error with a byte offset, io exit code.
    {
        std::ofstream f(base / "bad.bin", std::ios::binary);
        f << "OODDxx";
    }
    expect("truncated dataset is an io error with a byte offset",
           run_cli("train --data " + (base / "bad.bin").string() + " --epochs 1 --out-dir " +
                   (base / "e6").string()),
           4, "byte");

    expect("sweep with K=0 is a validation error",
           run_cli("sweep --weights " + model_dir + "/weights.json --suite " + suite_dir +
                   " --score msp --k-list 0 --out-dir " + (base / "e7").string()),
           2, "error: validation");

    fs::remove_all(base);
    if (failures == 0) {
        std::cout << "all cli cases passed\n";
        return 0;
    }
    std::cout << failures << " cli cases failed\n";
    return 1;
}
