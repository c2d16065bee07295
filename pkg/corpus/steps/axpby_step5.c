float c[N], v[N], a, b;
__stml_0 = a + b;
for (int i = 0; i < N; i++) {
    c[i] = __stml_0 * v[i];
}
