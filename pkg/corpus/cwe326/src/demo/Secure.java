package demo;

import java.security.KeyPair;
import java.security.KeyPairGenerator;

public class Secure {
    public KeyPair newKeys() throws Exception {
        KeyPairGenerator generator = KeyPairGenerator.getInstance("RSA");
        generator.initialize(3072);
        return generator.generateKeyPair();
    }
}
