function initializeParams() {
    return {};
}

function dynamicScript(deltaTime, params) {
    function g(n) { if (n > 0) return g(n - 1); throw new Error('deep'); }
    for (;;) { try { g(500); } catch (e) {} }
}
