int v[N], w[N], z[N];

for (int i = 0; i < N; i++) {
    w[i] = v[i] % 7 + v[i] / 3;
}
for (int i = 0; i < N; i++) {
    z[i] = v[i] * 2;
}
