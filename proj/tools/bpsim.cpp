// Placeholder main; the full CLI lands with the experiments module.
int main() { return 0; }
