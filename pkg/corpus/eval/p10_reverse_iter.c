float v[N], w[N], z[N], a;

for (int i = N - 1; i >= 0; i--) {
    w[i] = a * v[i];
}
for (int i = N - 1; i >= 0; i--) {
    z[i] = v[i] + a;
}
