#include <mlstab/cli_app.hpp>

int main(int argc, char** argv) { return mlstab::run_cli(argc, argv); }
